#pragma once

// Haar analysis on the dyadic torus, product / little / little product BMO
// norms, cancellative dyadic shifts and bi-parameter paraproducts.
//
// Per-parameter Haar index j in [0, N^d): j = 0 is the average 1 (the torus
// has measure 1); a cube Q of level l (side 2^-l, 2^{l d} cubes in row-major
// order) with signature eps in [1, 2^d) has
//   j = 2^{l d} + cube * (2^d - 1) + (eps - 1).
// Bit (d-1-a) of eps selects the Haar factor along axis a (set) or the
// indicator (clear). Haar functions are L2 normalized, h = |Q|^{-1/2} (+-1)
// with + on the lower half.

#include <complex>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "commlab/lattice.hpp"

namespace commlab {

struct HaarLabel {
  int level = -1;  // -1 for the average
  std::size_t cube = 0;
  int signature = 0;
};

HaarLabel haar_label(int dim, std::size_t j);
std::size_t haar_index(int dim, const HaarLabel& label);

/// Haar coefficients in the parameters of `params`; other parameters stay in
/// the space domain. Stored in the same row-major layout as a Field.
class HaarTensor {
 public:
  HaarTensor() = default;
  HaarTensor(GridSpec spec, std::set<std::size_t> params, std::vector<cplx> coefficients);

  const GridSpec& spec() const { return spec_; }
  const std::set<std::size_t>& params() const { return params_; }
  std::span<const cplx> coefficients() const { return coefficients_; }
  std::span<cplx> coefficients() { return coefficients_; }
  cplx& operator[](std::size_t i) { return coefficients_[i]; }
  const cplx& operator[](std::size_t i) const { return coefficients_[i]; }

 private:
  GridSpec spec_;
  std::set<std::size_t> params_;
  std::vector<cplx> coefficients_;
};

HaarTensor haar_analysis(const Field& b);
HaarTensor haar_analysis(const Field& b, const std::set<std::size_t>& params);
Field haar_synthesis(const HaarTensor& t);

struct DyadicCube {
  int level = 0;
  std::size_t index = 0;  // row-major among the 2^{level d} cubes

  bool operator==(const DyadicCube&) const = default;
};

struct DyadicRectangle {
  std::vector<std::size_t> params;  // 0-based, ascending
  std::vector<DyadicCube> cubes;    // one per entry of params

  double measure(const GridSpec& spec) const;
  nlohmann::json to_json() const;
};

struct BmoResult {
  double value = 0.0;
  std::vector<DyadicRectangle> achieving_set;
  /// Local point index of each frozen parameter (SIZE_MAX for grouped ones).
  std::vector<std::size_t> frozen_point;
  std::vector<std::size_t> choice;  // grouping that attained the value
  int budget = 0;

  nlohmann::json to_json() const;
};

constexpr int kDefaultOpenSetBudget = 8;

/// Carleson-type product BMO norm of b in the grouped parameters,
///   sup_U ( |U|^{-1} sum_{R in U} sum_eps |<b, w_R^eps>|^2 )^{1/2},
/// with U ranging over single dyadic rectangles and a greedy chain of unions
/// of up to `budget` rectangles. Only fully cancellative coefficients enter
/// (averages in grouped parameters are projected off). Parameters outside
/// the grouping are frozen and the sup is also taken over their grid points.
BmoResult product_bmo_norm(const Field& b, const std::vector<std::size_t>& grouping,
                           int budget = kDefaultOpenSetBudget);

/// sup over dyadic rectangles of all parameters of |Q|^{-1} int_Q |b - b_Q|.
struct LittleBmoResult {
  double value = 0.0;
  DyadicRectangle rectangle;
};
LittleBmoResult little_bmo_norm(const Field& b);

/// max over parameters v and frozen points of the other parameters of the
/// one-parameter dyadic BMO norm sup_Q (|Q|^{-1} int_Q |b - b_Q|^2)^{1/2} in
/// variable v. Computed in the space domain, independently of the Haar path.
double separate_variable_bmo_norm(const Field& b);

class PartitionSpec {
 public:
  PartitionSpec() = default;
  /// Blocks of 0-based parameter indices; must partition {0..t-1}.
  PartitionSpec(std::vector<std::vector<std::size_t>> blocks, std::size_t t);

  /// Parses "(13)(2)" or "(1,3)(2)" (1-based).
  static PartitionSpec parse(const std::string& text, std::size_t t);
  static PartitionSpec trivial(std::size_t t);  // (1)(2)...(t)
  static PartitionSpec full(std::size_t t);     // (12...t)
  std::string to_string() const;

  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  std::size_t param_count() const { return t_; }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::size_t t_ = 0;
};

/// max over choice vectors (one parameter per block) of product_bmo_norm with
/// that grouping; the sup over the frozen complementary variables is part of
/// product_bmo_norm.
BmoResult little_product_bmo_norm(const Field& b, const PartitionSpec& part,
                                  int budget = kDefaultOpenSetBudget);

// Dyadic shifts ----------------------------------------------------------------

enum class ShiftCoefficients {
  kRandomPhase,  // bound x uniform random phase
  kCanonical,    // bound on the diagonal I = J, same signature; 0 elsewhere
  kCustom,
};

/// One coefficient slot of a bi-parameter shift: for each parameter the cube
/// K and the Haar indices of I (input) and J (output). Coefficient maps keep
/// the signature, so I and J carry the same eps in each parameter.
struct ShiftTerm {
  DyadicCube k[2];
  std::size_t i[2];
  std::size_t j[2];
};

struct ShiftSpec {
  int i1 = 0, j1 = 0, i2 = 0, j2 = 0;
  ShiftCoefficients coefficients = ShiftCoefficients::kRandomPhase;
  std::uint64_t seed = 0;
  std::function<cplx(const ShiftTerm&)> custom;  // kCustom only

  nlohmann::json to_json() const;
};

/// Largest admissible |a| for the term: prod over parameters of sqrt(|I||J|)/|K|.
double shift_coefficient_bound(const GridSpec& grid, const ShiftTerm& term);

class DyadicShift {
 public:
  DyadicShift(const ShiftSpec& spec, const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  const ShiftSpec& spec() const { return spec_; }
  std::size_t term_count() const { return coeffs_.size(); }

  Field apply(const Field& f) const;
  Field apply_adjoint(const Field& f) const;

 private:
  struct ParamTerm {
    DyadicCube k;
    std::size_t i, j;
  };
  Field transfer(const Field& f, bool adjoint) const;

  ShiftSpec spec_;
  GridSpec grid_;
  std::vector<ParamTerm> terms_[2];
  std::vector<cplx> coeffs_;  // terms_[0].size() x terms_[1].size()
};

DyadicShift make_shift(const ShiftSpec& spec, const GridSpec& grid);
Field apply_shift(const DyadicShift& s, const Field& f);

// Paraproducts ---------------------------------------------------------------

enum class SlotKind { kCancellative, kAverage };

struct ParaproductSpec {
  int k = 0, l = 0;
  /// Function paired with f, and output function, per variable.
  SlotKind input[2] = {SlotKind::kAverage, SlotKind::kAverage};
  SlotKind output[2] = {SlotKind::kCancellative, SlotKind::kCancellative};
  bool random_signs = false;  // beta_IJ = +-1 from seed, else all +1
  std::uint64_t seed = 0;

  /// Classical B_0: b and output cancellative, f paired with averages.
  static ParaproductSpec classical();
  void validate() const;
};

struct ParaproductResult {
  Field value;
  std::size_t dropped_terms = 0;  // pairs (I,J) whose ancestor is above the top cube
};

/// B_{k,l}(b, f) = sum_{I,J} beta_IJ <b, h_{I^(k)} x h_{J^(l)}> <f, s_I x s_J>
///   o_I x o_J |I^(k)|^{-1/2} |J^(l)|^{-1/2}
/// on a grid of two one-dimensional parameters, where s and o are Haar or
/// average |I|^{-1/2} 1_I functions as given by the spec.
ParaproductResult paraproduct(const ParaproductSpec& spec, const Field& b, const Field& f);

}  // namespace commlab
