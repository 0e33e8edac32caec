#pragma once

// Linear operators on fields, commutators with multiplication by a symbol,
// L2 operator norm estimation, opposing-cone test functions and the bilinear
// form dual to iterated commutators.

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "commlab/dyadic.hpp"
#include "commlab/lattice.hpp"
#include "commlab/multiplier.hpp"

namespace commlab {

class LinearOperator {
 public:
  using Fn = std::function<Field(const Field&)>;

  LinearOperator() = default;
  /// `params` lists the parameters the operator acts on; empty means unknown.
  LinearOperator(GridSpec spec, Fn apply, Fn adjoint, nlohmann::json descriptor,
                 std::set<std::size_t> params = {});

  const GridSpec& spec() const { return spec_; }
  const nlohmann::json& descriptor() const { return descriptor_; }
  const std::set<std::size_t>& params() const { return params_; }

  Field apply(const Field& f) const;
  Field apply_adjoint(const Field& f) const;
  Field operator()(const Field& f) const { return apply(f); }
  LinearOperator adjoint() const;

 private:
  GridSpec spec_;
  Fn apply_, adjoint_;
  nlohmann::json descriptor_;
  std::set<std::size_t> params_;
};

LinearOperator identity_operator(const GridSpec& spec);
LinearOperator multiplier_operator(const Multiplier& m);
LinearOperator shift_operator(const DyadicShift& s);
/// f -> b f.
LinearOperator multiplication_operator(const Field& b);
/// a after b.
LinearOperator compose(const LinearOperator& a, const LinearOperator& b);
LinearOperator sum(const LinearOperator& a, const LinearOperator& b);
LinearOperator scale(const LinearOperator& a, cplx s);

/// f -> T(b f) - b T(f).
LinearOperator commutator(const LinearOperator& t, const Field& b);

/// Right-nested [T_1, [T_2, ... [T_l, b] ...]]. Operators sharing parameters
/// are allowed; a note is appended to `warnings` when given.
LinearOperator iterated_commutator(const std::vector<LinearOperator>& ts, const Field& b,
                                   std::vector<std::string>* warnings = nullptr);

enum class NormMethod { kPower, kDense };

struct NormEstimate {
  double value = 0.0;
  NormMethod method = NormMethod::kPower;
  int iterations = 0;
  double residual = 0.0;
  std::uint64_t seed = 0;
  bool converged = true;

  nlohmann::json to_json() const;
};

constexpr std::size_t kDenseLimit = 4096;

/// Largest singular value. Power iteration on A*A from a seeded Gaussian
/// start (relative tolerance `tol` on the estimate), or the dense method
/// which materializes A (at most kDenseLimit points) and uses an SVD, or
/// power iteration on the matrix to 1e-10 above 1024 points.
NormEstimate operator_norm(const LinearOperator& a, NormMethod method = NormMethod::kPower,
                           double tol = 1e-6, int max_iter = 500, std::uint64_t seed = 0);

/// f = tensor of f_k with f_k^ supported in the opposing cone D(-xi_k, r_k),
/// seeded random coefficients, L2 normalized. Parameters without a cone get
/// the constant factor.
Field opposing_test_function(const GridSpec& spec, const std::vector<ConeSpec>& cones, std::uint64_t seed);

/// Pi(f, g) with <[T_1,[...[T_l,b]]] f, g> = <b, Pi(f, g)> for every b:
///   Pi = sum over splittings (A left, B right) of (-1)^{|B|} conj(R_B f) L_A^* g,
/// where L_A = T_{a_1} ... T_{a_k} (ascending) and R_B = T_{b_k} ... T_{b_1}.
Field pi_form(const Field& f, const Field& g, const std::vector<LinearOperator>& ts);

}  // namespace commlab
