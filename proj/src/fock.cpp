#include "pairsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pairsim {

FockSpace::FockSpace(int num_sites_, int n_max_, bool periodic_)
    : num_sites(num_sites_), n_max(n_max_), periodic(periodic_) {
  if (num_sites < 1) throw ValidationError("FockSpace: num_sites must be >= 1");
  if (n_max < 1) throw ValidationError("FockSpace: n_max must be >= 1");
  if (periodic && num_sites < 2) throw ValidationError("FockSpace: periodic chain needs >= 2 sites");
}

namespace {

SiteOperator make_site(int d, const std::string& label, DenseMatrix m) {
  if (d < 1) throw ValidationError("site operator: dimension must be >= 1");
  return SiteOperator{std::move(m), label};
}

void check_dim(int d, int min_d, const char* what) {
  if (d < min_d)
    throw ValidationError(std::string(what) + ": degenerate below local dimension " +
                          std::to_string(min_d) + ", got " + std::to_string(d));
}

}  // namespace

SiteOperator site_identity(int d) {
  return make_site(d, "id", DenseMatrix::Identity(d, d));
}

SiteOperator site_annihilation(int d) {
  check_dim(d, 2, "annihilation");
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return make_site(d, "a", std::move(m));
}

SiteOperator site_creation(int d) {
  SiteOperator a = site_annihilation(d);
  return make_site(d, "adag", a.matrix.adjoint());
}

SiteOperator site_number(int d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = n;
  return make_site(d, "n", std::move(m));
}

SiteOperator site_parity(int d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return make_site(d, "parity", std::move(m));
}

SiteOperator site_defect_projector(int d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 1; n < d; n += 2) m(n, n) = 1.0;
  return make_site(d, "defect_proj", std::move(m));
}

SiteOperator site_pair_lower(int d) {
  check_dim(d, 3, "pair lowering");
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 2; n < d; ++n) m(n - 2, n) = std::sqrt(static_cast<double>(n) * (n - 1));
  return make_site(d, "a2", std::move(m));
}

SiteOperator site_pair_raise(int d) {
  SiteOperator low = site_pair_lower(d);
  return make_site(d, "adag2", low.matrix.adjoint());
}

SiteOperator site_dark_pair_raise(int d) {
  check_dim(d, 3, "pair raising");
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n + 2 < d; ++n)
    m(n + 2, n) = std::sqrt(static_cast<double>(n + 2) / static_cast<double>(n + 1));
  return make_site(d, "adag2_inv_n1", std::move(m));
}

SiteOperator site_defect_raise(int d) {
  check_dim(d, 2, "defect raising");
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n + 1 < d; ++n) m(n + 1, n) = 1.0 / std::sqrt(static_cast<double>(n + 1));
  return make_site(d, "adag_inv_n1", std::move(m));
}

SiteOperator site_kerr(int d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = static_cast<double>(n) * (n - 1);
  return make_site(d, "n(n-1)", std::move(m));
}

SiteOperator site_odd_penalty(int d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = static_cast<double>(n) * (n - 2);
  return make_site(d, "n(n-2)", std::move(m));
}

LatticeOperator LatticeOperator::adjoint() const {
  LatticeOperator out;
  out.matrix = SparseMatrix(matrix.adjoint());
  out.matrix.makeCompressed();
  out.space = space;
  out.support = support;
  out.hermitian = hermitian;
  out.label = label.empty() ? label : label + "^dag";
  return out;
}

namespace {

void check_embed_dimension(const TensorSpace& space) {
  if (space.dimension() > kMaxEmbedDimension)
    throw ValidationError("embed: full-space dimension too large for dense/sparse construction");
}

std::vector<int> sorted_support(std::vector<int> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

LatticeOperator embed_product(const std::vector<std::pair<SiteOperator, int>>& factors,
                              const TensorSpace& space) {
  check_embed_dimension(space);
  const std::size_t dim = space.dimension();
  const int nf = space.num_factors();
  std::vector<int> sites;
  for (const auto& [op, site] : factors) {
    if (site < 0 || site >= nf) throw ValidationError("embed: site out of range");
    if (op.dim() != space.dims[static_cast<std::size_t>(site)])
      throw ValidationError("embed: operator dimension does not match local dimension");
    sites.push_back(site);
  }
  if (sorted_support(sites).size() != sites.size())
    throw ValidationError("embed: repeated site in product");

  // Per involved site, the nonzero rows for each column of its matrix.
  struct SiteAction {
    int site;
    std::vector<std::vector<std::pair<int, Complex>>> rows_for_col;
  };
  std::vector<SiteAction> actions;
  for (const auto& [op, site] : factors) {
    SiteAction act;
    act.site = site;
    act.rows_for_col.resize(static_cast<std::size_t>(op.dim()));
    for (int c = 0; c < op.dim(); ++c)
      for (int r = 0; r < op.dim(); ++r)
        if (op.matrix(r, c) != Complex(0.0, 0.0))
          act.rows_for_col[static_cast<std::size_t>(c)].emplace_back(r, op.matrix(r, c));
    actions.push_back(std::move(act));
  }

  std::vector<Eigen::Triplet<Complex>> trips;
  std::vector<int> digits;
  std::vector<int> row_digits;
  for (std::size_t col = 0; col < dim; ++col) {
    space.digits_of(col, digits);
    // Expand the product over nonzero rows of every involved site.
    std::vector<std::size_t> pick(actions.size(), 0);
    bool any_empty = false;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      const auto& rows =
          actions[k].rows_for_col[static_cast<std::size_t>(digits[static_cast<std::size_t>(actions[k].site)])];
      if (rows.empty()) {
        any_empty = true;
        break;
      }
    }
    if (any_empty) continue;
    while (true) {
      row_digits = digits;
      Complex value(1.0, 0.0);
      for (std::size_t k = 0; k < actions.size(); ++k) {
        const auto& rows =
            actions[k].rows_for_col[static_cast<std::size_t>(digits[static_cast<std::size_t>(actions[k].site)])];
        const auto& [r, v] = rows[pick[k]];
        row_digits[static_cast<std::size_t>(actions[k].site)] = r;
        value *= v;
      }
      trips.emplace_back(static_cast<int>(space.index_of(row_digits)), static_cast<int>(col), value);
      // Advance the multi-index over row choices.
      std::size_t k = 0;
      for (; k < actions.size(); ++k) {
        const auto& rows =
            actions[k].rows_for_col[static_cast<std::size_t>(digits[static_cast<std::size_t>(actions[k].site)])];
        if (++pick[k] < rows.size()) break;
        pick[k] = 0;
      }
      if (k == actions.size()) break;
    }
  }

  LatticeOperator out;
  out.space = space;
  out.matrix = SparseMatrix(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.matrix.makeCompressed();
  out.support = sorted_support(sites);
  return out;
}

LatticeOperator embed(const SiteOperator& op, int site, const TensorSpace& space) {
  LatticeOperator out = embed_product({{op, site}}, space);
  out.label = op.label;
  return out;
}

LatticeOperator embed(const SiteOperator& op, int site, const FockSpace& space) {
  return embed(op, site, space.tensor());
}

LatticeOperator embed_two_site(const DenseMatrix& block, int bond, const FockSpace& space) {
  if (space.periodic)
    throw ValidationError("embed_two_site: only open chains are supported");
  if (bond < 0 || bond >= space.num_bonds())
    throw ValidationError("embed_two_site: bond index out of range");
  const TensorSpace ts = space.tensor();
  check_embed_dimension(ts);
  const int j = bond;
  const int k = bond + 1;
  const int dj = ts.dims[static_cast<std::size_t>(j)];
  const int dk = ts.dims[static_cast<std::size_t>(k)];
  if (block.rows() != static_cast<Eigen::Index>(dj) * dk || block.cols() != block.rows())
    throw ValidationError("embed_two_site: block dimension does not match the bond's sites");

  // Nonzero (row, value) pairs per block column.
  std::vector<std::vector<std::pair<int, Complex>>> cols(static_cast<std::size_t>(block.cols()));
  for (Eigen::Index c = 0; c < block.cols(); ++c)
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      if (block(r, c) != Complex(0.0, 0.0))
        cols[static_cast<std::size_t>(c)].emplace_back(static_cast<int>(r), block(r, c));

  std::vector<Eigen::Triplet<Complex>> trips;
  std::vector<int> digits;
  std::vector<int> row_digits;
  const std::size_t dim = ts.dimension();
  for (std::size_t col = 0; col < dim; ++col) {
    ts.digits_of(col, digits);
    const int cb = digits[static_cast<std::size_t>(j)] * dk + digits[static_cast<std::size_t>(k)];
    for (const auto& [rb, v] : cols[static_cast<std::size_t>(cb)]) {
      row_digits = digits;
      row_digits[static_cast<std::size_t>(j)] = rb / dk;
      row_digits[static_cast<std::size_t>(k)] = rb % dk;
      trips.emplace_back(static_cast<int>(ts.index_of(row_digits)), static_cast<int>(col), v);
    }
  }
  LatticeOperator out;
  out.space = ts;
  out.matrix = SparseMatrix(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.matrix.makeCompressed();
  out.support = {j, k};
  out.label = "two_site[" + std::to_string(bond) + "]";
  return out;
}

namespace {

void check_same_space(const LatticeOperator& a, const LatticeOperator& b) {
  if (!(a.space == b.space)) throw ValidationError("lattice operators live on different spaces");
}

}  // namespace

LatticeOperator operator*(const LatticeOperator& a, const LatticeOperator& b) {
  check_same_space(a, b);
  LatticeOperator out;
  out.space = a.space;
  out.matrix = SparseMatrix(a.matrix * b.matrix);
  out.matrix.prune(Complex(0.0, 0.0));
  out.matrix.makeCompressed();
  std::vector<int> s = a.support;
  s.insert(s.end(), b.support.begin(), b.support.end());
  out.support = sorted_support(std::move(s));
  return out;
}

LatticeOperator operator+(const LatticeOperator& a, const LatticeOperator& b) {
  check_same_space(a, b);
  LatticeOperator out;
  out.space = a.space;
  out.matrix = SparseMatrix(a.matrix + b.matrix);
  out.matrix.prune(Complex(0.0, 0.0));
  out.matrix.makeCompressed();
  std::vector<int> s = a.support;
  s.insert(s.end(), b.support.begin(), b.support.end());
  out.support = sorted_support(std::move(s));
  out.hermitian = a.hermitian && b.hermitian;
  return out;
}

LatticeOperator operator-(const LatticeOperator& a, const LatticeOperator& b) {
  return a + (Complex(-1.0, 0.0) * b);
}

LatticeOperator operator*(Complex scale, const LatticeOperator& a) {
  LatticeOperator out = a;
  out.matrix *= scale;
  out.hermitian = a.hermitian && scale.imag() == 0.0;
  return out;
}

namespace {

// Resolve a bond to its (left, right) site pair, honoring periodic wrap.
std::pair<int, int> bond_sites(int bond, const FockSpace& space) {
  if (space.num_sites < 2) throw ValidationError("bond operator: chain needs >= 2 sites");
  if (bond < 0 || bond >= space.num_bonds())
    throw ValidationError("bond operator: bond index out of range");
  return {bond, (bond + 1) % space.num_sites};
}

}  // namespace

LatticeOperator pair_jump(int bond, const FockSpace& space) {
  const auto [j, k] = bond_sites(bond, space);
  const int d = space.local_dim();
  check_dim(d, 3, "pair_jump");
  const TensorSpace ts = space.tensor();
  const SiteOperator raise2 = site_pair_raise(d);
  const SiteOperator lower2 = site_pair_lower(d);
  LatticeOperator raise_sum = embed(raise2, j, ts) + embed(raise2, k, ts);
  LatticeOperator lower_diff = embed(lower2, j, ts) - embed(lower2, k, ts);
  LatticeOperator out = raise_sum * lower_diff;
  out.support = {std::min(j, k), std::max(j, k)};
  out.label = "pair_jump[" + std::to_string(bond) + "]";
  return out;
}

LatticeOperator heal_jump(int site, const FockSpace& space, double gamma) {
  if (site < 0 || site >= space.num_sites) throw ValidationError("heal_jump: site out of range");
  const int d = space.local_dim();
  const TensorSpace ts = space.tensor();
  const SiteOperator a = site_annihilation(d);
  const SiteOperator adag = site_creation(d);

  auto neighbour = [&](int delta) -> std::optional<int> {
    int t = site + delta;
    if (space.periodic) return (t % space.num_sites + space.num_sites) % space.num_sites;
    if (t < 0 || t >= space.num_sites) return std::nullopt;
    return t;
  };

  std::optional<LatticeOperator> hop_sum;
  for (int delta : {+1, -1}) {
    const auto target = neighbour(delta);
    if (!target || *target == site) continue;
    LatticeOperator term = embed_product({{adag, *target}, {a, site}}, ts);
    hop_sum = hop_sum ? (*hop_sum + term) : term;
  }
  if (!hop_sum) throw ValidationError("heal_jump: no neighbours on this chain");

  LatticeOperator out = *hop_sum * embed(site_defect_projector(d), site, ts);
  out = Complex(gamma, 0.0) * out;
  out.label = "heal_jump[" + std::to_string(site) + "]";
  return out;
}

LatticeOperator heal_bond_channel(int bond, HopDirection dir, const FockSpace& space) {
  const auto [j, k] = bond_sites(bond, space);
  const int source = (dir == HopDirection::Right) ? j : k;
  const int target = (dir == HopDirection::Right) ? k : j;
  const int d = space.local_dim();
  const TensorSpace ts = space.tensor();
  LatticeOperator out =
      embed_product({{site_creation(d), target}, {site_annihilation(d), source}}, ts) *
      embed(site_defect_projector(d), source, ts);
  out.support = {std::min(j, k), std::max(j, k)};
  out.label = std::string("heal_bond[") + std::to_string(bond) + (dir == HopDirection::Right ? ",R]" : ",L]");
  return out;
}

LatticeOperator hardcore_heal_jump(int bond, const FockSpace& space) {
  const auto [j, k] = bond_sites(bond, space);
  const int d = space.local_dim();
  const TensorSpace ts = space.tensor();
  const SiteOperator a = site_annihilation(d);
  const SiteOperator adag = site_creation(d);
  LatticeOperator hop = embed_product({{adag, j}, {a, k}}, ts) + embed_product({{adag, k}, {a, j}}, ts);
  LatticeOperator out = hop * embed(site_odd_penalty(d), j, ts);
  out.support = {std::min(j, k), std::max(j, k)};
  out.label = "hardcore_heal[" + std::to_string(bond) + "]";
  return out;
}

LatticeOperator hop_noise_jump(int bond, const FockSpace& space) {
  const auto [j, k] = bond_sites(bond, space);
  const int d = space.local_dim();
  LatticeOperator out =
      embed_product({{site_creation(d), j}, {site_annihilation(d), k}}, space.tensor());
  out.label = "hop_noise[" + std::to_string(bond) + "]";
  return out;
}

namespace {

LatticeOperator site_sum(const SiteOperator& op, double coeff, const FockSpace& space,
                         const std::string& label) {
  const TensorSpace ts = space.tensor();
  std::optional<LatticeOperator> sum;
  for (int j = 0; j < space.num_sites; ++j) {
    LatticeOperator term = embed(op, j, ts);
    sum = sum ? (*sum + term) : term;
  }
  LatticeOperator out = Complex(coeff, 0.0) * (*sum);
  out.hermitian = true;
  out.label = label;
  return out;
}

}  // namespace

LatticeOperator kerr_hamiltonian(double u, const FockSpace& space) {
  return site_sum(site_kerr(space.local_dim()), u, space, "kerr");
}

LatticeOperator penalty_hamiltonian(double v0, const FockSpace& space) {
  return site_sum(site_odd_penalty(space.local_dim()), -v0, space, "odd_penalty");
}

LatticeOperator total_number(const FockSpace& space) {
  return site_sum(site_number(space.local_dim()), 1.0, space, "total_number");
}

LatticeOperator site_parity_operator(int site, const FockSpace& space) {
  LatticeOperator out = embed(site_parity(space.local_dim()), site, space);
  out.hermitian = true;
  return out;
}

LatticeOperator site_number_operator(int site, const FockSpace& space) {
  LatticeOperator out = embed(site_number(space.local_dim()), site, space);
  out.hermitian = true;
  return out;
}

double max_abs(const SparseMatrix& m) {
  double mx = 0.0;
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) mx = std::max(mx, std::abs(it.value()));
  return mx;
}

double max_norm_diff(const LatticeOperator& a, const LatticeOperator& b) {
  check_same_space(a, b);
  return max_abs(SparseMatrix(a.matrix - b.matrix));
}

}  // namespace pairsim
