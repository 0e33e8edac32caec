#pragma once

// Discrete multi-parameter torus T^{d_1} x ... x T^{d_t}, each factor sampled
// on N_k points per axis. The torus has total measure 1, so the cell volume of
// a lattice point is prod_k N_k^{-d_k}.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "commlab/error.hpp"

namespace commlab {

using cplx = std::complex<double>;

struct ParamSpec {
  int dim = 1;     // d_k
  int points = 4;  // N_k, points per axis

  bool operator==(const ParamSpec&) const = default;
};

class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<ParamSpec> params);

  /// Parses "1x16,1x16,2x8" (dim x points per parameter).
  static GridSpec parse(const std::string& text);
  std::string to_string() const;

  std::size_t param_count() const { return params_.size(); }
  const ParamSpec& param(std::size_t k) const { return params_.at(k); }
  const std::vector<ParamSpec>& params() const { return params_; }

  std::size_t total_points() const { return total_; }
  double cell_volume() const { return cell_volume_; }

  /// Number of lattice points of parameter k alone (N_k^{d_k}).
  std::size_t param_points(std::size_t k) const { return param_points_.at(k); }
  /// Row-major stride of the first axis of parameter k.
  std::size_t param_stride(std::size_t k) const { return param_stride_.at(k); }
  /// log2(N_k).
  int depth(std::size_t k) const { return depth_.at(k); }

  std::size_t axis_count() const { return axis_sizes_.size(); }
  const std::vector<int>& axis_sizes() const { return axis_sizes_; }
  /// Index of the first axis belonging to parameter k.
  std::size_t first_axis(std::size_t k) const { return first_axis_.at(k); }

  /// Decomposes a flat row-major index into per-parameter flat indices.
  void split(std::size_t flat, std::span<std::size_t> per_param) const;
  std::size_t join(std::span<const std::size_t> per_param) const;

  bool operator==(const GridSpec& o) const { return params_ == o.params_; }

 private:
  std::vector<ParamSpec> params_;
  std::vector<std::size_t> param_points_, param_stride_;
  std::vector<int> depth_;
  std::vector<int> axis_sizes_;
  std::vector<std::size_t> first_axis_;
  std::size_t total_ = 0;
  double cell_volume_ = 1.0;
};

/// Integer frequency stored at FFT index i on an axis of n points, in the
/// symmetric range [-n/2, n/2). The index n/2 maps to -n/2.
inline int axis_frequency(int i, int n) { return i < n / 2 ? i : i - n; }

class Field {
 public:
  Field() = default;
  explicit Field(GridSpec spec);  // zero field
  Field(GridSpec spec, std::vector<cplx> samples);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const cplx> samples() const { return samples_; }
  std::span<cplx> samples() { return samples_; }
  cplx& operator[](std::size_t i) { return samples_[i]; }
  const cplx& operator[](std::size_t i) const { return samples_[i]; }

  bool all_finite() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx s);

 private:
  GridSpec spec_;
  std::vector<cplx> samples_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
/// Pointwise product (multiplication operator M_a applied to b).
Field pointwise(const Field& a, const Field& b);
Field conj(Field a);

/// Fourier coefficients in FFT storage order; frequency of index i on an axis
/// of n points is axis_frequency(i, n).
class FreqField {
 public:
  FreqField() = default;
  FreqField(GridSpec spec, std::vector<cplx> coefficients);

  const GridSpec& spec() const { return spec_; }
  std::span<const cplx> coefficients() const { return coefficients_; }
  std::span<cplx> coefficients() { return coefficients_; }
  cplx& operator[](std::size_t i) { return coefficients_[i]; }
  const cplx& operator[](std::size_t i) const { return coefficients_[i]; }

  /// Coefficient at integer frequency vector n (one entry per axis).
  cplx at(std::span<const int> freq) const;

 private:
  GridSpec spec_;
  std::vector<cplx> coefficients_;
};

/// Unitary DFT over every axis: F(n) = prod_a N_a^{-1/2} sum_x f(x) e^{-2 pi i n.x/N}.
FreqField forward_transform(const Field& f);
FreqField forward_transform(const GridSpec& spec, std::span<const cplx> samples);
Field inverse_transform(const FreqField& F);

/// <f,g> = sum f conj(g) * cell volume.
cplx inner_product(const Field& f, const Field& g);
double l2_norm(const Field& f);
/// Same normalization as the space side so that Parseval reads |f| = |F|.
double l2_norm(const FreqField& F);

/// Frequency vectors of every lattice point, one int per axis, flat row-major.
std::vector<int> frequency_table(const GridSpec& spec);

// Serialization. Binary container: magic "CMLFIELD", u32 header length, JSON
// header {version, params, layout, dtype}, then interleaved little-endian
// re/im doubles.
void save_field(const Field& f, const std::string& path);
Field load_field(const std::string& path);
std::string field_to_json(const Field& f);
Field field_from_json(const std::string& text);

}  // namespace commlab
