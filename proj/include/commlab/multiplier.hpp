#pragma once

// Fourier multipliers on the lattice: Hilbert and Riesz transforms, analytic
// projections, cone projections (ball and cube base), mollified cone
// operators, and tensor products across parameters.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "commlab/lattice.hpp"

namespace commlab {

class Multiplier {
 public:
  Multiplier() = default;
  Multiplier(GridSpec spec, std::vector<cplx> symbol, std::set<std::size_t> params,
             nlohmann::json descriptor);

  const GridSpec& spec() const { return spec_; }
  std::span<const cplx> symbol() const { return symbol_; }
  /// Parameters the symbol depends on; identity in every other parameter.
  const std::set<std::size_t>& params() const { return params_; }
  const nlohmann::json& descriptor() const { return descriptor_; }

  double max_abs() const;

 private:
  GridSpec spec_;
  std::vector<cplx> symbol_;
  std::set<std::size_t> params_;
  nlohmann::json descriptor_;
};

enum class HilbertSign { kMinusI, kPlusI };

Multiplier make_identity(const GridSpec& spec);

/// symbol -i sgn(n_k) (or +i sgn with kPlusI); sgn(0)=0 and the Nyquist index
/// counts as negative. Requires d_k = 1.
Multiplier make_hilbert(const GridSpec& spec, std::size_t k,
                        HilbertSign sign = HilbertSign::kMinusI);

/// -i n_j / |n^{(k)}| on parameter k; j is 1-based, j = 0 is the identity.
Multiplier make_riesz(const GridSpec& spec, std::size_t k, int j);

/// Indicator of strictly positive (sign=+1) or strictly negative (sign=-1)
/// frequencies of a one-dimensional parameter: the discrete P and P^perp.
Multiplier make_analytic_projection(const GridSpec& spec, std::size_t k, int sign);

/// Projection onto the mean in parameter k (frequency block n^{(k)} = 0).
Multiplier make_mean_projection(const GridSpec& spec, std::size_t k);

enum class ConeBase { kBall, kCube };

struct ConeSpec {
  std::size_t param = 0;
  std::vector<double> direction;  // unit vector in R^{d_k}
  /// Ball base: geodesic aperture r in (0, pi/2). Cube base: half side of the
  /// aperture cube Q in direction^perp (any positive value).
  double aperture = 0.5;
  ConeBase base = ConeBase::kBall;
  double tau = 0.2;
  int smoothness = 0;  // m; 0 selects max_k d_k

  void validate(const GridSpec& spec) const;
};

/// Smoothstep polynomial of degree 2m+1 on [0,1]: 0 at 0, 1 at 1, with m
/// vanishing derivatives at both ends; clamped outside.
double smoothstep(int m, double x);

/// Orthonormal basis of dir^perp (Gram-Schmidt over the standard basis).
std::vector<std::vector<double>> orthogonal_complement(std::span<const double> dir);

/// Geodesic distance on the unit sphere between unit vectors.
double geodesic_distance(std::span<const double> a, std::span<const double> b);

/// Cone membership gauge of a nonzero frequency vector: for a ball cone the
/// ratio d(dir, eta/|eta|)/r, for a cube cone max_i |<eta,e_i>| / (h <eta,dir>)
/// (infinite off the half space). Inside the cone iff gauge <= 1.
double cone_gauge(const ConeSpec& cone, std::span<const double> eta);

Multiplier make_cone_projection(const GridSpec& spec, const ConeSpec& cone);

/// Radially extended mollified cone symbol with
/// chi_C <= symbol <= chi_{(1+tau)C}; the transition is 1 - smoothstep on the
/// normalized gauge.
Multiplier make_smooth_cone(const GridSpec& spec, const ConeSpec& cone);

/// Uniformly random symbol in the closed unit disc, depending on the listed
/// parameters only (all parameters when empty).
Multiplier make_random_multiplier(const GridSpec& spec, std::uint64_t seed,
                                  std::set<std::size_t> params = {});

/// Product of symbols; parameter subsets must be disjoint.
Multiplier tensor(const std::vector<Multiplier>& ms);
/// Product of symbols with no disjointness requirement (operator composition).
Multiplier compose(const Multiplier& a, const Multiplier& b);
Multiplier adjoint(const Multiplier& m);

Field apply(const Multiplier& m, const Field& f);

/// Builds a multiplier from its JSON descriptor (the format emitted in
/// descriptor()). Parameter indices in descriptors are 1-based.
Multiplier build_multiplier(const GridSpec& spec, const nlohmann::json& descriptor);

/// Parses the compact CLI grammar, e.g. "riesz:k=1,j=2",
/// "scone:k=1,dir=[1,0],r=0.6,tau=0.2", "tensor(riesz:k=1,j=1 ; riesz:k=3,j=2)",
/// into a JSON descriptor. Cone directions are normalized here.
nlohmann::json parse_multiplier_descriptor(const std::string& text);

}  // namespace commlab
