// Acceptance run: one PASS/FAIL line per criterion A1..A11.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "commlab/commutator.hpp"
#include "commlab/dyadic.hpp"
#include "commlab/explab.hpp"
#include "commlab/multiplier.hpp"
#include "commlab/rng.hpp"
#include "commlab/zonal.hpp"

using namespace commlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Field random_field(const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> v(g.total_points());
  for (auto& x : v) {
    const double re = standard_normal(rng);
    x = {re, standard_normal(rng)};
  }
  return Field(g, std::move(v));
}

// Random trigonometric polynomial with |n_a| <= band[a] on every axis.
Field band_limited(const GridSpec& g, const std::vector<int>& band, std::uint64_t seed) {
  Rng rng(seed);
  const auto freq = frequency_table(g);
  const std::size_t axes = g.axis_count();
  std::vector<cplx> hat(g.total_points(), 0.0);
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const double re = standard_normal(rng), im = standard_normal(rng);
    bool in = true;
    for (std::size_t a = 0; a < axes; ++a) in = in && std::abs(freq[i * axes + a]) <= band[a];
    if (in) hat[i] = {re, im};
  }
  return inverse_transform(FreqField(g, std::move(hat)));
}

std::vector<double> unit(Rng& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double n = 0.0;
  for (auto& x : v) {
    x = standard_normal(rng);
    n += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

// Unit vector at geodesic distance theta from pole, in a random direction.
std::vector<double> near_pole(Rng& rng, const std::vector<double>& pole, double theta) {
  auto v = unit(rng, static_cast<int>(pole.size()));
  const double c = dot(v, pole);
  double n = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] -= c * pole[i];
    n += v[i] * v[i];
  }
  n = std::sqrt(n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(theta) * pole[i] + std::sin(theta) * v[i] / n;
  return v;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

LinearOperator op(const Multiplier& m) { return multiplier_operator(m); }

// A1: [H,T] against 2PTP^perp - 2P^perp TP (up to the factor -i of the
// -i sgn convention) on mean-zero probes, T = M_b o m random.
Outcome a1() {
  const auto g = GridSpec::parse("1x32");
  const auto h = op(make_hilbert(g, 0));
  const auto p = op(make_analytic_projection(g, 0, 1));
  const auto q = op(make_analytic_projection(g, 0, -1));
  const auto e = op(make_mean_projection(g, 0));
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = compose(multiplication_operator(random_field(g, derive_seed(1, s))),
                           op(make_random_multiplier(g, derive_seed(2, s))));
    const auto lhs = sum(compose(h, t), scale(compose(t, h), -1.0));
    const auto rhs = scale(sum(compose(p, compose(t, q)), scale(compose(q, compose(t, p)), -1.0)), cplx(0.0, -2.0));
    const auto diff = sum(lhs, scale(rhs, -1.0));
    for (std::uint64_t k = 0; k < 4; ++k) {
      Field f = random_field(g, derive_seed(3, s * 4 + k));
      f -= e.apply(f);
      Field d = diff.apply(f);
      d -= e.apply(d);
      worst = std::max(worst, l2_norm(d) / l2_norm(f));
    }
  }
  return {worst <= 1e-12, fmt("max probe defect %.2e (tol 1e-12)", worst)};
}

// A2: 200 random shifts with complexities <= (2,2,2,2) on 16 x 16.
Outcome a2() {
  const auto g = GridSpec::parse("1x16,1x16");
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const int c = s % 81;
    ShiftSpec spec{c % 3, (c / 3) % 3, (c / 9) % 3, (c / 27) % 3};
    spec.seed = derive_seed(0xA2, static_cast<std::uint64_t>(s));
    const auto n = operator_norm(shift_operator(DyadicShift(spec, g)), NormMethod::kDense);
    worst = std::max(worst, n.value);
  }
  return {worst <= 1.0 + 1e-9, fmt("max dense norm %.12f (bound 1 + 1e-9)", worst)};
}

// A3: empirical constant of the shift commutator bound at N = 16 and 32.
Outcome a3() {
  double cst[2];
  const char* grids[2] = {"1x16,1x16", "1x32,1x32"};
  for (int i = 0; i < 2; ++i) {
    const auto cfg = ExperimentConfig::parse(std::string("grid = ") + grids[i] +
                                             "\nsymbol.seed = 303\nsamples = 50\nshift.max_complexity = 3\n");
    const auto rep = run_shift_bound(cfg);
    cst[i] = rep.summary.max;
  }
  const double change = std::max(cst[0], cst[1]) / std::min(cst[0], cst[1]);
  const bool ok = std::isfinite(cst[0]) && std::isfinite(cst[1]) && cst[0] > 0 && change < 2.0;
  return {ok, fmt("constant N=16 %.4f, N=32 %.4f, change %.3fx (< 2x)", cst[0], cst[1], change)};
}

// A4: product formula at 1e6 samples, 50 cases.
Outcome a4() {
  Rng rng(0xA4);
  int bad = 0;
  double worst_z = 0.0;
  for (int c = 0; c < 50; ++c) {
    const int d = 2 + c % 3;
    const int n = 1 + (c / 3) % 6;
    const auto x1 = unit(rng, d), x2 = unit(rng, d), e1 = unit(rng, d), e2 = unit(rng, d);
    const double exact = zonal_eval(n, d, dot(x1, e1)) * zonal_eval(n, d, dot(x2, e2));
    const auto mc = mc_conditional_expectation(n, d, x1, x2, e1, e2, 1000000, derive_seed(0xA4, c));
    const double err = std::abs(mc.estimate - exact);
    if (mc.exact) {
      if (err > 1e-12) ++bad;
      continue;
    }
    const double z = err / mc.standard_error;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++bad;
  }
  return {bad == 0, fmt("%.0f of 50 outside 3 SE, worst z %.2f", bad, worst_z)};
}

// A5: C_2^{(41)} against the iterated construction, d = 2.
Outcome a5() {
  JourneConeSpec s;
  s.params = {0, 1};
  s.directions = {{1.0, 0.0}, {0.0, 1.0}};
  s.degree = 41;
  const JourneCone cone(s);
  Rng rng(0xA5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<std::vector<double>> etas = {unit(rng, 2), unit(rng, 2)};
    const auto it = iterated_expectation_cone(cone, etas, 10000, derive_seed(0xA5, i));
    worst = std::max(worst, std::abs(it.estimate - cone.eval(etas)));
  }
  return {worst <= 1e-2, fmt("sup error %.2e over 1000 points (tol 1e-2)", worst)};
}

// A6: plateau and flipped plateau, delta(N) decreasing.
Outcome a6() {
  double delta[3];
  const int degrees[3] = {11, 21, 41};
  bool ok = true;
  double worst_ratio = 0.0;
  for (int m = 0; m < 3; ++m) {
    JourneConeSpec s;
    s.params = {0, 1};
    s.directions = {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    s.degree = degrees[m];
    const JourneCone cone(s);
    delta[m] = cone.delta();
    const double r = s.profile.plateau_radius();
    Rng rng(0xA6);
    for (int i = 0; i < 1000; ++i) {
      std::vector<std::vector<double>> etas;
      for (const auto& xi : s.directions) etas.push_back(near_pole(rng, xi, r * uniform01(rng)));
      const bool flip = i % 2 == 1;
      if (flip) {
        auto& e = etas[static_cast<std::size_t>(i / 2 % 2)];
        for (auto& x : e) x = -x;
      }
      const double dev = std::abs(cone.eval(etas) - (flip ? -1.0 : 1.0));
      worst_ratio = std::max(worst_ratio, dev / delta[m]);
      ok = ok && dev <= delta[m];
    }
  }
  ok = ok && delta[2] < delta[1] && delta[1] < delta[0];
  return {ok, fmt("delta(11) %.2e, delta(21) %.2e, delta(41) %.2e", delta[0], delta[1], delta[2]) +
                  fmt("; max deviation / delta %.3f", worst_ratio)};
}

// A7: translated x3 cuts of B = P1perp P2perp b P1 P2 on 32^3.
Outcome a7() {
  const auto g = GridSpec::parse("1x32,1x32,1x32");
  const int n = 32, l = n / 4;
  std::vector<cplx> cut(g.total_points(), 0.0);
  const auto freq = frequency_table(g);
  for (std::size_t i = 0; i < cut.size(); ++i) cut[i] = freq[i * 3 + 2] >= 1 - l ? 1.0 : 0.0;
  const Multiplier pl(g, cut, {2}, {{"kind", "x3_cut"}, {"l", l}});
  const auto left = compose(make_analytic_projection(g, 0, -1), make_analytic_projection(g, 1, -1));
  const auto right = compose(make_analytic_projection(g, 0, 1), make_analytic_projection(g, 1, 1));
  const auto cut_left = op(compose(pl, left)), cut_right = op(compose(right, pl));
  double total = 0.0, lo = 1.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto mb = multiplication_operator(band_limited(g, {6, 6, 2}, derive_seed(0xA7, s)));
    const double full = operator_norm(compose(op(left), compose(mb, op(right))), NormMethod::kPower, 1e-6, 2000, s).value;
    const double part = operator_norm(compose(cut_left, compose(mb, cut_right)), NormMethod::kPower, 1e-6, 2000, s).value;
    const double r = part / full;
    total += r;
    lo = std::min(lo, r);
  }
  const double mean = total / 20.0;
  return {mean >= 0.95, fmt("mean ratio %.4f (>= 0.95), min %.4f, l = %.0f", mean, lo, l)};
}

// A8: two-sided band for [H2,[H1 H3, b]] against BMO_(13)(2).
Outcome a8() {
  double band[2];
  double lo_ratio = 1e300, hi_ratio = 0.0;
  const char* grids[2] = {"1x16,1x16,1x16", "1x32,1x32,1x32"};
  bool ok = true;
  int kept = 0;
  for (int i = 0; i < 2; ++i) {
    const auto cfg = ExperimentConfig::parse(std::string("grid = ") + grids[i] +
                                             "\npartition = (13)(2)\n"
                                             "family = hilbert:k=2 | tensor(hilbert:k=1;hilbert:k=3)\n"
                                             "symbol.seed = 808\nsamples = 50\nnorm.tol = 1e-6\n");
    const auto rep = run_two_sided(cfg);
    std::vector<double> r;
    for (const auto& row : rep.rows) {
      if (row.bmo < 1e-3) continue;
      ok = ok && std::isfinite(row.ratio) && row.ratio > 0.0;
      r.push_back(row.ratio);
      lo_ratio = std::min(lo_ratio, row.ratio);
      hi_ratio = std::max(hi_ratio, row.ratio);
    }
    if (i == 0) kept = static_cast<int>(r.size());
    ok = ok && r.size() >= 2;
    band[i] = r.empty() ? INFINITY : *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
  }
  const double drift = std::max(band[0], band[1]) / std::min(band[0], band[1]);
  ok = ok && drift < 2.0;
  // separable in x2
  const auto sep = ExperimentConfig::parse(
      "grid = 1x16,1x16,1x16\npartition = (13)(2)\nfamily = hilbert:k=2 | tensor(hilbert:k=1;hilbert:k=3)\n"
      "symbol.kind = separable\nsymbol.param = 2\nsymbol.seed = 9\nsamples = 10\n");
  double sep_max = 0.0;
  for (const auto& row : run_two_sided(sep).rows) sep_max = std::max(sep_max, row.commutator);
  ok = ok && sep_max <= 1e-9;
  return {ok, fmt("band N=16 %.3f, N=32 %.3f, drift %.3fx", band[0], band[1], drift) +
                  fmt("; ratios in [%.3f, %.3f], %.0f kept", lo_ratio, hi_ratio, kept) +
                  fmt("; separable max %.1e", sep_max)};
}

// A9: pairing identity, Ts = (H2, H1 x H3), 8^3.
Outcome a9() {
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  const std::vector<LinearOperator> ts = {op(make_hilbert(g, 1)),
                                          op(tensor({make_hilbert(g, 0), make_hilbert(g, 2)}))};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Field b = random_field(g, derive_seed(0xA9, 3 * s)), f = random_field(g, derive_seed(0xA9, 3 * s + 1)),
                h = random_field(g, derive_seed(0xA9, 3 * s + 2));
    const cplx lhs = inner_product(iterated_commutator(ts, b).apply(f), h);
    const cplx rhs = inner_product(b, pi_form(f, h, ts));
    worst = std::max(worst, std::abs(lhs - rhs) / (l2_norm(b) * l2_norm(f) * l2_norm(h)));
  }
  return {worst <= 1e-10, fmt("max relative defect %.2e (tol 1e-10)", worst)};
}

// A10: opposing-support reduction, two 2-D parameters at N = 32.
Outcome a10() {
  const auto g = GridSpec::parse("2x32,2x32");
  ConeSpec c1, c2;
  c1.param = 0;
  c1.direction = {1.0, 0.0};
  c1.aperture = 0.5;
  c2.param = 1;
  c2.direction = {0.6, 0.8};
  c2.aperture = 0.4;
  const auto td = op(tensor({make_smooth_cone(g, c1), make_smooth_cone(g, c2)}));
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Field b = random_field(g, derive_seed(0xA10, s));
    const Field f = opposing_test_function(g, {c1, c2}, derive_seed(0xA11, s));
    const Field bf = pointwise(b, f);
    const Field d = commutator(td, b).apply(f) - td.apply(bf);
    worst = std::max(worst, l2_norm(d) / l2_norm(bf));
  }
  return {worst <= 1e-12, fmt("max relative defect %.2e (tol 1e-12)", worst)};
}

// A11: degenerate partitions on 8^3.
Outcome a11() {
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  const auto cfg = ExperimentConfig::parse("grid = 1x8,1x8,1x8\nsymbol.seed = 1111\n");
  double worst_product = 0.0, worst_little = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    const Field b = gen_symbol(cfg, s);
    const double lp_t = little_product_bmo_norm(b, PartitionSpec::trivial(3)).value;
    const double pb = product_bmo_norm(b, {0, 1, 2}).value;
    worst_product = std::max(worst_product, std::abs(lp_t - pb));
    const double lp_f = little_product_bmo_norm(b, PartitionSpec::full(3)).value;
    const double lb = separate_variable_bmo_norm(b);
    worst_little = std::max(worst_little, std::abs(lp_f - lb) / lb);
  }
  return {worst_product == 0.0 && worst_little <= 1e-12,
          fmt("(1)(2)(3) vs product: max gap %.1e; (123) vs little bmo: max relative gap %.1e", worst_product,
              worst_little)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {"A1", 5, a1},    {"A2", 120, a2}, {"A3", 300, a3}, {"A4", 180, a4},  {"A5", 120, a5}, {"A6", 60, a6},
      {"A7", 120, a7},  {"A8", 600, a8}, {"A9", 30, a9},  {"A10", 60, a10}, {"A11", 60, a11},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.limit_s;
    if (!pass) ++failed;
    std::printf("%-4s %s  %s  [%.1f s, limit %.0f s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
