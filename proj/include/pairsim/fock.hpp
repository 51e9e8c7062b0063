#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pairsim/tensor_space.hpp"
#include "pairsim/types.hpp"

namespace pairsim {

// Chain of bosonic sites with a hard occupation cutoff n_max (local dim d = n_max+1).
// Site 0 is the slowest-varying tensor factor. Chains are open unless `periodic`.
struct FockSpace {
  int num_sites = 0;
  int n_max = 0;
  bool periodic = false;

  FockSpace() = default;
  FockSpace(int num_sites_, int n_max_, bool periodic_ = false);

  int local_dim() const { return n_max + 1; }
  std::size_t dimension() const { return tensor().dimension(); }
  TensorSpace tensor() const {
    return TensorSpace(std::vector<int>(static_cast<std::size_t>(num_sites), local_dim()));
  }
  // Bonds are (j, j+1); a periodic chain adds the wrap bond (L-1, 0).
  int num_bonds() const { return periodic ? num_sites : num_sites - 1; }

  std::vector<int> occupations_of(std::size_t index) const { return tensor().digits_of(index); }
  std::size_t index_of(const std::vector<int>& occupations) const {
    return tensor().index_of(occupations);
  }

  bool operator==(const FockSpace& o) const {
    return num_sites == o.num_sites && n_max == o.n_max && periodic == o.periodic;
  }
};

// Dense matrix acting on one local space.
struct SiteOperator {
  DenseMatrix matrix;
  std::string label;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

SiteOperator site_identity(int d);
SiteOperator site_annihilation(int d);   // a|n> = sqrt(n)|n-1>,   requires d >= 2
SiteOperator site_creation(int d);       // truncated at n_max
SiteOperator site_number(int d);
SiteOperator site_parity(int d);         // (-1)^n
SiteOperator site_defect_projector(int d);  // (1 - (-1)^n)/2
SiteOperator site_pair_lower(int d);     // a^2, requires d >= 3
SiteOperator site_pair_raise(int d);     // a†^2, requires d >= 3
SiteOperator site_dark_pair_raise(int d);    // a†^2 (n+1)^{-1}: sqrt((n+2)/(n+1)) |n+2><n|
SiteOperator site_defect_raise(int d);       // a† (n+1)^{-1}:   1/sqrt(n+1)     |n+1><n|
SiteOperator site_kerr(int d);           // a†^2 a^2 = n(n-1)
SiteOperator site_odd_penalty(int d);    // n(n-2)

// Sparse operator on the full product space, tagged with the sites it acts on.
struct LatticeOperator {
  SparseMatrix matrix;
  TensorSpace space;
  std::vector<int> support;  // sorted sites the operator acts on non-trivially
  bool hermitian = false;
  std::string label;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  LatticeOperator adjoint() const;
};

// Guard for dense/sparse full-space construction; MPS paths never embed.
inline constexpr std::size_t kMaxEmbedDimension = 1u << 21;

LatticeOperator embed(const SiteOperator& op, int site, const TensorSpace& space);
LatticeOperator embed(const SiteOperator& op, int site, const FockSpace& space);
// Product of single-site operators on pairwise-distinct sites (applied as written: one matrix).
LatticeOperator embed_product(const std::vector<std::pair<SiteOperator, int>>& factors,
                              const TensorSpace& space);

LatticeOperator operator*(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator+(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator-(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator*(Complex scale, const LatticeOperator& a);

// Pair jump l_j = (a†²_j + a†²_{j+1})(a²_j − a²_{j+1}) on bond j. Conserves total
// photon number and every site parity; requires n_max >= 2.
LatticeOperator pair_jump(int bond, const FockSpace& space);

// Healing jump c_j = Γ (a†_{j+1} a_j + a†_{j−1} a_j)(1 − P_j)/2; terms whose
// neighbour falls off an open chain are dropped.
LatticeOperator heal_jump(int site, const FockSpace& space, double gamma);

// Directed bond channel a†_{target} a_{source} (1 − P_source)/2 used by the bond-local
// unraveling of c_j; carries no rate factor (the Lindblad rate is supplied by the model).
enum class HopDirection { Right, Left };
LatticeOperator heal_bond_channel(int bond, HopDirection dir, const FockSpace& space);

// Hard-core healing variant c′_j = (a†_j a_{j+1} + a†_{j+1} a_j) n_j(n_j − 2).
LatticeOperator hardcore_heal_jump(int bond, const FockSpace& space);

// Hopping noise l′_j = a†_j a_{j+1}.
LatticeOperator hop_noise_jump(int bond, const FockSpace& space);

// Embed an arbitrary dense two-site matrix (row/column index n_j·d_k + n_k for
// the bond's sites j = bond, k = bond + 1) into the full lattice.
LatticeOperator embed_two_site(const DenseMatrix& block, int bond, const FockSpace& space);

LatticeOperator kerr_hamiltonian(double u, const FockSpace& space);       // U Σ_j a†²_j a²_j
LatticeOperator penalty_hamiltonian(double v0, const FockSpace& space);   // −V0 Σ_j n_j(n_j−2)
LatticeOperator total_number(const FockSpace& space);
LatticeOperator site_parity_operator(int site, const FockSpace& space);
LatticeOperator site_number_operator(int site, const FockSpace& space);

// max-norm of (A − B); both must share a space.
double max_norm_diff(const LatticeOperator& a, const LatticeOperator& b);
double max_abs(const SparseMatrix& m);

}  // namespace pairsim
