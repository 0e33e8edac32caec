#pragma once

#include <cmath>
#include <vector>

#include "commlab/lattice.hpp"
#include "commlab/rng.hpp"

namespace testutil {

inline commlab::Field random_field(const commlab::GridSpec& g, std::uint64_t seed, bool real = false) {
  commlab::Rng rng(seed);
  std::vector<commlab::cplx> v(g.total_points());
  for (auto& x : v) {
    const double re = commlab::standard_normal(rng);
    const double im = real ? 0.0 : commlab::standard_normal(rng);
    x = {re, im};
  }
  return commlab::Field(g, std::move(v));
}

// Removes the mean in every parameter separately.
inline commlab::Field mean_free(const commlab::Field& f) {
  auto F = commlab::forward_transform(f);
  const auto& g = f.spec();
  const auto freq = commlab::frequency_table(g);
  const std::size_t axes = g.axis_count();
  for (std::size_t i = 0; i < F.coefficients().size(); ++i) {
    for (std::size_t k = 0; k < g.param_count(); ++k) {
      bool zero = true;
      for (int a = 0; a < g.param(k).dim; ++a) zero = zero && freq[i * axes + g.first_axis(k) + a] == 0;
      if (zero) F[i] = 0.0;
    }
  }
  return commlab::inverse_transform(F);
}

inline double max_diff(const commlab::Field& a, const commlab::Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
