#pragma once

// Zonal harmonics, zonal expansions of odd cone profiles, and the Journe type
// cone multipliers C_i^{(N)}(xi; eta) = sum_{n<=N} phi_n prod_k Z^{(n)}_{xi_k}(eta_k).

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "commlab/lattice.hpp"
#include "commlab/multiplier.hpp"

namespace commlab {

/// Degree-n zonal harmonic on S^{d-1} as a function of t = <xi, eta>,
/// normalized to 1 at t = 1: Chebyshev T_n for d = 2, Legendre P_n for d = 3,
/// Gegenbauer C_n^{(d-2)/2}(t)/C_n^{(d-2)/2}(1) in general.
double zonal_eval(int n, int d, double t);

/// Values Z^{(0)}(t) .. Z^{(n_max)}(t) in one recurrence sweep.
void zonal_values(int n_max, int d, double t, std::span<double> out);

/// Odd profile phi: [-1,1] -> [-1,1], 0 on [0,b], 1 on [a,1], smoothstep of
/// order m in between, extended by phi(-t) = -phi(t).
struct PhiProfile {
  double a = 0.75;
  double b = 0.25;
  int smoothness = 4;

  void validate() const;
  double operator()(double t) const;
  /// Aperture of the plateau ball: d(xi, eta) < r implies phi(<xi,eta>) = 1.
  double plateau_radius() const;
};

struct ZonalCoefficients {
  int dimension = 2;
  int degree = 0;
  std::vector<double> values;  // phi_0 .. phi_N
  double quadrature_residual = 0.0;
  int nodes_per_panel = 0;

  double eval(double t) const;
};

/// Coefficients of g against the zonal system with weight (1-t^2)^{(d-3)/2},
/// computed by panelled Gauss-Legendre quadrature in the angle (t = cos theta).
/// `breakpoints` are t-values where g is not smooth; panels are split there.
ZonalCoefficients zonal_coefficients(const std::function<double(double)>& g, int d, int degree,
                                     std::vector<double> breakpoints = {});
ZonalCoefficients phi_coefficients(const PhiProfile& profile, int d, int degree);

/// Empirical sup over a dense t-sample of |sum_{n<=N} phi_n Z_n - phi|,
/// optionally skipping the transition intervals b < |t| < a.
double truncation_error(const ZonalCoefficients& c, const PhiProfile& profile,
                        bool away_from_transitions = false);

struct JourneConeSpec {
  std::vector<std::size_t> params;              // 0-based parameter indices
  std::vector<std::vector<double>> directions;  // one unit vector per parameter
  PhiProfile profile;
  int degree = 21;
  int embedding_dimension = 0;  // 0 selects max(2, max_k d_k)
};

JourneConeSpec journe_spec_from_json(const nlohmann::json& d);
nlohmann::json journe_spec_to_json(const JourneConeSpec& s);

/// Evaluator for a fixed Journe cone: holds the zonal coefficients and the
/// measured truncation bound delta(N).
class JourneCone {
 public:
  explicit JourneCone(JourneConeSpec spec);

  const JourneConeSpec& spec() const { return spec_; }
  int dimension() const { return dim_; }
  const ZonalCoefficients& coefficients() const { return coeffs_; }
  double delta() const { return delta_; }

  /// C_i^{(N)}(xi; eta_1..eta_i); every eta_k must be a unit vector (it may
  /// have its own parameter dimension, it is zero-padded to the embedding).
  double eval(const std::vector<std::vector<double>>& etas) const;
  /// Same, from the inner products t_k = <xi_k, eta_k>.
  double eval_cosines(std::span<const double> cosines) const;

 private:
  JourneConeSpec spec_;
  int dim_ = 2;
  ZonalCoefficients coeffs_;
  double delta_ = 0.0;
};

double journe_cone_eval(const JourneCone& cone, const std::vector<std::vector<double>>& etas);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  bool exact = false;  // degenerate or two-point sub-sphere, enumerated
};

/// Monte Carlo estimate of E_a( Z^{(n)}_{eta1}(a) | d(xi1, a) = d(xi2, eta2) ),
/// with a uniform on the sub-sphere of S^{d-1} at that geodesic distance
/// from xi1. Chunks of fixed size use derived seeds, so the result does not
/// depend on how the work is split.
McEstimate mc_conditional_expectation(int n, int d, std::span<const double> xi1,
                                      std::span<const double> xi2, std::span<const double> eta1,
                                      std::span<const double> eta2, std::uint64_t samples,
                                      std::uint64_t seed);

/// The iterated conditional-expectation construction of C_i, starting from
/// C_1(xi; eta) = phi(<xi, eta>) (or its truncation C_1^{(N)} when
/// `truncated`) and replacing the last pole by a sub-sphere sample at each
/// step. For d = 2 every sub-sphere has at most two points and the
/// expectation is enumerated.
McEstimate iterated_expectation_cone(const JourneCone& cone,
                                     const std::vector<std::vector<double>>& etas,
                                     std::uint64_t samples, std::uint64_t seed,
                                     bool truncated = false);

struct PlateauCertificate {
  double radius = 0.0;
  double delta = 0.0;
  std::size_t plateau_points = 0;
  std::size_t flipped_points = 0;
  double max_plateau_deviation = 0.0;  // max |C - 1| on plateau lattice points
  double max_flipped_deviation = 0.0;  // max |C + 1| on single-flip lattice points
  bool holds() const {
    return max_plateau_deviation <= delta && max_flipped_deviation <= delta;
  }
};

struct JourneMultiplier {
  Multiplier multiplier;
  PlateauCertificate certificate;
};

/// Samples C_i^{(N)} at eta_k = n^{(k)}/|n^{(k)}| on the lattice (zero where
/// any block frequency vanishes) and checks the plateau on lattice points.
JourneMultiplier journe_multiplier_certified(const JourneConeSpec& spec, const GridSpec& grid);
Multiplier journe_multiplier(const JourneConeSpec& spec, const GridSpec& grid);

}  // namespace commlab
