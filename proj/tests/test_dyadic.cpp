#include <doctest.h>

#include <cmath>

#include "commlab/commutator.hpp"
#include "commlab/dyadic.hpp"
#include "commlab/explab.hpp"
#include "helpers.hpp"

using namespace commlab;

namespace {

// Explicit L2-normalized Haar function h_I on one 1-D parameter of n points.
std::vector<double> haar_1d(int n, int level, int pos) {
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  const int len = n >> level;
  const double s = std::pow(2.0, level / 2.0);
  for (int x = pos * len; x < (pos + 1) * len; ++x) h[static_cast<std::size_t>(x)] = x < pos * len + len / 2 ? s : -s;
  return h;
}

// sum over j > 0 of |<v, h_j>|^2 for intervals inside [lo, hi), 1-D.
double carleson_1d(const std::vector<cplx>& v, int n, int qlevel, int qpos) {
  double e = 0.0;
  for (int level = qlevel; (1 << level) < n; ++level) {
    const int span = 1 << (level - qlevel);
    for (int pos = qpos * span; pos < (qpos + 1) * span; ++pos) {
      const auto h = haar_1d(n, level, pos);
      cplx c = 0.0;
      for (int x = 0; x < n; ++x) c += v[static_cast<std::size_t>(x)] * h[static_cast<std::size_t>(x)];
      e += std::norm(c / static_cast<double>(n));
    }
  }
  return e * (1 << qlevel);  // divided by |Q|
}

}  // namespace

TEST_CASE("Haar labels round trip") {
  for (int d = 1; d <= 3; ++d) {
    const std::size_t n = std::size_t{1} << (3 * d);
    CHECK(haar_label(d, 0).level == -1);
    for (std::size_t j = 1; j < n; ++j) {
      const auto l = haar_label(d, j);
      CHECK(l.signature >= 1);
      CHECK(l.signature < (1 << d));
      CHECK(haar_index(d, l) == j);
    }
  }
}

TEST_CASE("Haar coefficients equal explicit inner products in 1-D") {
  const auto g = GridSpec::parse("1x16");
  const Field f = testutil::random_field(g, 12);
  const auto t = haar_analysis(f);
  cplx mean = 0.0;
  for (std::size_t x = 0; x < 16; ++x) mean += f[x];
  CHECK(std::abs(t[0] - mean / 16.0) < 1e-14);
  for (std::size_t j = 1; j < 16; ++j) {
    const auto l = haar_label(1, j);
    const auto h = haar_1d(16, l.level, static_cast<int>(l.cube));
    cplx c = 0.0;
    for (std::size_t x = 0; x < 16; ++x) c += f[x] * h[x];
    CHECK(std::abs(t[j] - c / 16.0) < 1e-13);
  }
}

TEST_CASE("Plancherel and round trip, full and partial") {
  for (const char* grid : {"1x16,1x8", "2x8,1x4", "3x4"}) {
    const auto g = GridSpec::parse(grid);
    const Field f = testutil::random_field(g, 5);
    const auto t = haar_analysis(f);
    double e = 0.0;
    for (const auto& c : t.coefficients()) e += std::norm(c);
    CHECK(std::sqrt(e) == doctest::Approx(l2_norm(f)).epsilon(1e-10));
    CHECK(testutil::max_diff(haar_synthesis(t), f) < 1e-12);
    const auto p = haar_analysis(f, {0});
    CHECK(testutil::max_diff(haar_synthesis(p), f) < 1e-12);
  }
}

TEST_CASE("norms vanish exactly on constants") {
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  Field c(g);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cplx(2.5, -1.0);
  CHECK(product_bmo_norm(c, {0, 1, 2}).value == 0.0);
  CHECK(little_bmo_norm(c).value == 0.0);
  CHECK(separate_variable_bmo_norm(c) == 0.0);
  CHECK(little_product_bmo_norm(c, PartitionSpec::parse("(13)(2)", 3)).value == 0.0);
}

TEST_CASE("product BMO vanishes when b is constant in a grouped variable") {
  const auto g = GridSpec::parse("1x8,1x8");
  Field b(g);
  Rng rng(2);
  std::vector<double> beta(8);
  for (auto& x : beta) x = standard_normal(rng);
  for (std::size_t x = 0; x < 8; ++x)
    for (std::size_t y = 0; y < 8; ++y) b[x * 8 + y] = beta[y];
  CHECK(product_bmo_norm(b, {0, 1}).value == 0.0);
  CHECK(product_bmo_norm(b, {1}).value > 0.1);
}

TEST_CASE("single-rectangle product BMO matches exhaustive search") {
  const auto g = GridSpec::parse("1x8,1x8");
  const Field b = testutil::random_field(g, 31);
  const auto t = haar_analysis(b);
  double best = 0.0;
  for (int l0 = 0; l0 < 3; ++l0)
    for (int p0 = 0; p0 < (1 << l0); ++p0)
      for (int l1 = 0; l1 < 3; ++l1)
        for (int p1 = 0; p1 < (1 << l1); ++p1) {
          double e = 0.0;
          for (std::size_t i = 1; i < 8; ++i)
            for (std::size_t j = 1; j < 8; ++j) {
              const auto a = haar_label(1, i), c = haar_label(1, j);
              const bool in0 = a.level >= l0 && (a.cube >> (a.level - l0)) == static_cast<std::size_t>(p0);
              const bool in1 = c.level >= l1 && (c.cube >> (c.level - l1)) == static_cast<std::size_t>(p1);
              if (in0 && in1) e += std::norm(t[i * 8 + j]);
            }
          best = std::max(best, std::sqrt(e * (1 << l0) * (1 << l1)));
        }
  CHECK(product_bmo_norm(b, {0, 1}, 1).value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("product BMO is monotone in the budget") {
  const auto g = GridSpec::parse("1x16,1x16");
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Field b = testutil::random_field(g, 100 + s);
    double prev = 0.0;
    for (int budget = 1; budget <= 10; ++budget) {
      const auto r = product_bmo_norm(b, {0, 1}, budget);
      CHECK(r.value >= prev);
      CHECK(r.achieving_set.size() <= static_cast<std::size_t>(budget));
      prev = r.value;
    }
  }
}

TEST_CASE("one-variable product BMO equals the exhaustive slice oracle") {
  // (123): one variable at a time, the others frozen.
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  ExperimentConfig cfg = ExperimentConfig::parse("grid = 1x8,1x8,1x8\nsymbol.kind = frozen-variable\nsymbol.seed = 4\nsymbol.frozen = 3\nsymbol.slice = 5\n");
  const Field b = gen_symbol(cfg, 0);
  double oracle = 0.0;
  for (std::size_t v = 0; v < 3; ++v) {
    const std::size_t stride = g.param_stride(v);
    for (std::size_t base = 0; base < b.size(); ++base) {
      if ((base / stride) % 8 != 0) continue;
      std::vector<cplx> fiber(8);
      for (std::size_t x = 0; x < 8; ++x) fiber[x] = b[base + x * stride];
      for (int ql = 0; ql < 3; ++ql)
        for (int qp = 0; qp < (1 << ql); ++qp) oracle = std::max(oracle, std::sqrt(carleson_1d(fiber, 8, ql, qp)));
    }
  }
  const auto r = little_product_bmo_norm(b, PartitionSpec::full(3));
  CHECK(r.value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(separate_variable_bmo_norm(b) == doctest::Approx(oracle).epsilon(1e-12));
  // oscillation sits on the frozen slice x3 = 5
  if (r.choice != std::vector<std::size_t>{2}) CHECK(r.frozen_point[2] == 5u);
}

TEST_CASE("degenerate partitions") {
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Field b = testutil::random_field(g, 40 + s);
    CHECK(little_product_bmo_norm(b, PartitionSpec::trivial(3)).value == product_bmo_norm(b, {0, 1, 2}).value);
    CHECK(little_product_bmo_norm(b, PartitionSpec::full(3)).value ==
          doctest::Approx(separate_variable_bmo_norm(b)).epsilon(1e-12));
  }
}

TEST_CASE("little bmo sees the mean oscillation") {
  const auto g = GridSpec::parse("1x4,1x4");
  Field b(g);
  for (std::size_t i = 0; i < 16; ++i) b[i] = (i / 4 < 2) ? 1.0 : -1.0;
  const auto r = little_bmo_norm(b);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.rectangle.cubes[0].level == 0);
}

TEST_CASE("partition parsing") {
  const auto p = PartitionSpec::parse("(13)(2)", 3);
  CHECK(p.blocks().size() == 2);
  CHECK(p.blocks()[0] == std::vector<std::size_t>{0, 2});
  CHECK(p.to_string() == "(13)(2)");
  CHECK(PartitionSpec::parse("(1,3)(2)", 3).to_string() == "(13)(2)");
  CHECK(PartitionSpec::trivial(3).to_string() == "(1)(2)(3)");
  CHECK(PartitionSpec::full(3).to_string() == "(123)");
  CHECK_THROWS_AS(PartitionSpec::parse("(1)(2)", 3), Error);
  CHECK_THROWS_AS(PartitionSpec::parse("(12)(2)(3)", 3), Error);
  CHECK_THROWS_AS(PartitionSpec::parse("(1)(4)(2)", 3), Error);
}

TEST_CASE("canonical zero-complexity shift is the identity on the cancellative span") {
  const auto g = GridSpec::parse("1x16,1x16");
  ShiftSpec s;
  s.coefficients = ShiftCoefficients::kCanonical;
  const DyadicShift sh(s, g);
  const Field f = testutil::random_field(g, 8);
  auto t = haar_analysis(f);
  for (std::size_t i = 0; i < 16; ++i) {
    t[i] = 0.0;       // first Haar index 0
    t[i * 16] = 0.0;  // second Haar index 0
  }
  const Field fc = haar_synthesis(t);
  CHECK(testutil::max_diff(sh.apply(fc), fc) < 1e-12);
  // the bracket with any b vanishes on that span when S is the identity there
  const Field b = testutil::random_field(g, 9);
  const Field bf = pointwise(b, fc);
  auto tb = haar_analysis(bf);
  for (std::size_t i = 0; i < 16; ++i) {
    tb[i] = 0.0;
    tb[i * 16] = 0.0;
  }
  CHECK(testutil::max_diff(sh.apply(bf), haar_synthesis(tb)) < 1e-12);
}

TEST_CASE("shift adjoint pairing and coefficient bound") {
  const auto g = GridSpec::parse("1x16,2x4");
  ShiftSpec s{1, 2, 0, 1};
  s.seed = 77;
  const DyadicShift sh(s, g);
  CHECK(sh.term_count() > 0);
  const Field f = testutil::random_field(g, 1), h = testutil::random_field(g, 2);
  CHECK(std::abs(inner_product(sh.apply(f), h) - inner_product(f, sh.apply_adjoint(h))) < 1e-12);
  ShiftSpec c{1, 0, 0, 0};
  c.coefficients = ShiftCoefficients::kCustom;
  c.custom = [&](const ShiftTerm& t) { return 2.0 * shift_coefficient_bound(g, t); };
  CHECK_THROWS_AS(DyadicShift(c, g), Error);
  ShiftSpec deep{4, 0, 0, 0};
  CHECK_THROWS_AS(DyadicShift(deep, g), Error);
}

TEST_CASE("random shifts are contractions") {
  const auto g = GridSpec::parse("1x8,1x8");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ShiftSpec s{static_cast<int>(seed % 3), static_cast<int>((seed / 3) % 3), static_cast<int>(seed % 2), 1};
    s.seed = seed;
    const auto est = operator_norm(shift_operator(DyadicShift(s, g)), NormMethod::kDense);
    CHECK(est.value <= 1.0 + 1e-9);
  }
}

TEST_CASE("classical paraproduct matches the direct sum") {
  const auto g = GridSpec::parse("1x8,1x8");
  const Field b = testutil::random_field(g, 3), f = testutil::random_field(g, 4);
  const auto r = paraproduct(ParaproductSpec::classical(), b, f);
  CHECK(r.dropped_terms == 0u);
  const auto bh = haar_analysis(b);
  Field want(g);
  for (std::size_t i = 1; i < 8; ++i) {
    for (std::size_t j = 1; j < 8; ++j) {
      const auto li = haar_label(1, i), lj = haar_label(1, j);
      const auto hi = haar_1d(8, li.level, static_cast<int>(li.cube));
      const auto hj = haar_1d(8, lj.level, static_cast<int>(lj.cube));
      cplx avg = 0.0;
      double n = 0.0;
      for (std::size_t x = 0; x < 8; ++x)
        for (std::size_t y = 0; y < 8; ++y)
          if (hi[x] != 0.0 && hj[y] != 0.0) {
            avg += f[x * 8 + y];
            n += 1.0;
          }
      avg /= n;
      for (std::size_t x = 0; x < 8; ++x)
        for (std::size_t y = 0; y < 8; ++y) want[x * 8 + y] += bh[i * 8 + j] * avg * hi[x] * hj[y];
    }
  }
  CHECK(testutil::max_diff(r.value, want) < 1e-12);
}

TEST_CASE("paraproduct ancestors above the top are dropped") {
  const auto g = GridSpec::parse("1x8,1x8");
  ParaproductSpec s;
  s.k = 1;
  s.input[0] = SlotKind::kCancellative;
  const Field b = testutil::random_field(g, 3), f = testutil::random_field(g, 4);
  const auto r = paraproduct(s, b, f);
  CHECK(r.dropped_terms == 7u);  // the top interval in x1 against every J
  ParaproductSpec bad;
  bad.output[0] = SlotKind::kAverage;
  CHECK_THROWS_AS(paraproduct(bad, b, f), Error);
  CHECK_THROWS_AS(paraproduct(ParaproductSpec::classical(), testutil::random_field(GridSpec::parse("2x4,1x4"), 1),
                              testutil::random_field(GridSpec::parse("2x4,1x4"), 2)),
                  Error);
}
