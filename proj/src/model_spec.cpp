#include "pairsim/model_spec.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace pairsim {

void PairModelSpec::validate() const {
  FockSpace probe(num_sites, n_max, periodic);  // validates sites/cutoff
  (void)probe;
  if (kappa < 0 || heal < 0 || hardcore_heal < 0 || hop_noise < 0)
    throw ValidationError("model: rates must be non-negative");
  if (kappa > 0 || hardcore_heal > 0)
    if (n_max < 2) throw ValidationError("model: pair channels need n_max >= 2");
}

LindbladModel build_dense_model(const PairModelSpec& spec) {
  spec.validate();
  const FockSpace space = spec.space();
  const TensorSpace ts = space.tensor();

  LindbladModel model = empty_model(ts);
  if (spec.kerr != 0.0) model.H = model.H + kerr_hamiltonian(spec.kerr, space);
  if (spec.penalty != 0.0) model.H = model.H + penalty_hamiltonian(spec.penalty, space);
  model.H.hermitian = true;

  const int d = space.local_dim();
  for (int b = 0; b < space.num_bonds(); ++b) {
    const int j = b;
    const int k = (b + 1) % space.num_sites;
    if (spec.kappa > 0) model.jumps.emplace_back(pair_jump(b, space), spec.kappa);
    if (spec.heal > 0) {
      model.jumps.emplace_back(heal_bond_channel(b, HopDirection::Right, space), spec.heal / 4.0);
      model.jumps.emplace_back(heal_bond_channel(b, HopDirection::Left, space), spec.heal / 4.0);
    }
    if (spec.hardcore_heal > 0)
      model.jumps.emplace_back(hardcore_heal_jump(b, space), spec.hardcore_heal);
    if (spec.hop_noise > 0) {
      model.jumps.emplace_back(hop_noise_jump(b, space), spec.hop_noise);  // k -> j
      LatticeOperator rev =
          embed_product({{site_creation(d), k}, {site_annihilation(d), j}}, ts);
      rev.label = "hop_noise_rev[" + std::to_string(b) + "]";
      model.jumps.emplace_back(std::move(rev), spec.hop_noise);  // j -> k
    }
  }
  model.validate();
  return model;
}

namespace {

DenseMatrix two_site(const SiteOperator& left, const SiteOperator& right) {
  return Eigen::kroneckerProduct(left.matrix, right.matrix).eval();
}

}  // namespace

void BondModel::validate() const {
  if (space.periodic) throw ValidationError("bond model: open chains only");
  if (static_cast<int>(h_bonds.size()) != space.num_bonds())
    throw ValidationError("bond model: one Hamiltonian piece per bond required");
  const int d2 = space.local_dim() * space.local_dim();
  for (const auto& h : h_bonds)
    if (h.rows() != d2 || h.cols() != d2)
      throw ValidationError("bond model: Hamiltonian piece has wrong dimension");
  for (const auto& c : channels) {
    if (c.bond < 0 || c.bond >= space.num_bonds())
      throw ValidationError("bond model: channel bond out of range");
    if (c.op.rows() != d2 || c.op.cols() != d2)
      throw ValidationError("bond model: channel operator has wrong dimension");
    if (c.rate < 0) throw ValidationError("bond model: negative channel rate");
  }
}

DenseMatrix BondModel::effective_bond_generator(int bond) const {
  if (bond < 0 || bond >= num_bonds())
    throw ValidationError("bond model: bond index out of range");
  DenseMatrix g = h_bonds[static_cast<std::size_t>(bond)];
  for (const auto& c : channels)
    if (c.bond == bond) g -= Complex(0.0, 1.0) * c.rate * (c.op.adjoint() * c.op);
  return g;
}

BondModel build_bond_model(const PairModelSpec& spec) {
  spec.validate();
  if (spec.periodic) throw ValidationError("bond model: open chains only");
  const FockSpace space = spec.space();
  const int d = space.local_dim();
  const int nb = space.num_bonds();

  const SiteOperator ident = site_identity(d);
  const SiteOperator a = site_annihilation(d);
  const SiteOperator adag = site_creation(d);
  const SiteOperator raise2 = site_pair_raise(d);
  const SiteOperator lower2 = site_pair_lower(d);
  const SiteOperator defect = site_defect_projector(d);
  const SiteOperator odd_pen = site_odd_penalty(d);

  BondModel model;
  model.space = space;
  model.h_bonds.assign(static_cast<std::size_t>(nb), DenseMatrix::Zero(d * d, d * d));

  // split single-site Hamiltonian terms onto bonds
  DenseMatrix h_site = DenseMatrix::Zero(d, d);
  if (spec.kerr != 0.0) h_site += spec.kerr * site_kerr(d).matrix;
  if (spec.penalty != 0.0) h_site -= spec.penalty * odd_pen.matrix;
  if (h_site.cwiseAbs().maxCoeff() > 0) {
    for (int j = 0; j < space.num_sites; ++j) {
      const bool left_edge = (j == 0);
      const bool right_edge = (j == space.num_sites - 1);
      const double own_bonds = (left_edge || right_edge) ? 1.0 : 2.0;
      const DenseMatrix share = h_site / own_bonds;
      if (!right_edge)
        model.h_bonds[static_cast<std::size_t>(j)] +=
            Eigen::kroneckerProduct(share, ident.matrix).eval();
      if (!left_edge)
        model.h_bonds[static_cast<std::size_t>(j - 1)] +=
            Eigen::kroneckerProduct(ident.matrix, share).eval();
    }
  }

  for (int b = 0; b < nb; ++b) {
    if (spec.kappa > 0) {
      DenseMatrix raise_sum = two_site(raise2, ident) + two_site(ident, raise2);
      DenseMatrix lower_diff = two_site(lower2, ident) - two_site(ident, lower2);
      model.channels.push_back(
          {b, raise_sum * lower_diff, spec.kappa, "pair[" + std::to_string(b) + "]"});
    }
    if (spec.heal > 0) {
      DenseMatrix right = two_site(ident, adag) * two_site(a, ident) * two_site(defect, ident);
      DenseMatrix left = two_site(adag, ident) * two_site(ident, a) * two_site(ident, defect);
      model.channels.push_back(
          {b, std::move(right), spec.heal / 4.0, "heal_right[" + std::to_string(b) + "]"});
      model.channels.push_back(
          {b, std::move(left), spec.heal / 4.0, "heal_left[" + std::to_string(b) + "]"});
    }
    if (spec.hardcore_heal > 0) {
      DenseMatrix hop = two_site(adag, a) + two_site(a, adag);
      model.channels.push_back({b, hop * two_site(odd_pen, ident), spec.hardcore_heal,
                                "hardcore_heal[" + std::to_string(b) + "]"});
    }
    if (spec.hop_noise > 0) {
      model.channels.push_back(
          {b, two_site(adag, a), spec.hop_noise, "noise_left[" + std::to_string(b) + "]"});
      model.channels.push_back(
          {b, two_site(a, adag), spec.hop_noise, "noise_right[" + std::to_string(b) + "]"});
    }
  }
  model.validate();
  return model;
}

}  // namespace pairsim
