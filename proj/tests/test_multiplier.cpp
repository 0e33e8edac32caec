#include <doctest.h>

#include <cmath>
#include <numbers>

#include "commlab/multiplier.hpp"
#include "helpers.hpp"

using namespace commlab;

namespace {

Field cosine(const GridSpec& g, int n, bool sine = false) {
  Field f(g);
  const int N = g.param(0).points;
  for (int x = 0; x < N; ++x) {
    const double ph = 2.0 * std::numbers::pi * n * x / N;
    f[static_cast<std::size_t>(x)] = sine ? std::sin(ph) : std::cos(ph);
  }
  return f;
}

double symbol_gap(const Multiplier& a, const Multiplier& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.symbol().size(); ++i) m = std::max(m, std::abs(a.symbol()[i] - b.symbol()[i]));
  return m;
}

}  // namespace

TEST_CASE("Hilbert transform maps cos to sin") {
  const auto g = GridSpec::parse("1x32");
  const Field h = apply(make_hilbert(g, 0), cosine(g, 3));
  CHECK(testutil::max_diff(h, cosine(g, 3, true)) < 1e-13);
  const Field hp = apply(make_hilbert(g, 0, HilbertSign::kPlusI), cosine(g, 3));
  CHECK(testutil::max_diff(hp, -1.0 * cosine(g, 3, true)) < 1e-13);
}

TEST_CASE("Hilbert symbol at zero and Nyquist") {
  const auto g = GridSpec::parse("1x8");
  const auto h = make_hilbert(g, 0);
  CHECK(h.symbol()[0] == cplx(0.0, 0.0));
  CHECK(h.symbol()[4] == cplx(0.0, 1.0));  // frequency -4
  CHECK(h.symbol()[1] == cplx(0.0, -1.0));
}

TEST_CASE("H^2 = -Id and P + Pperp = Id on mean-zero functions") {
  const auto g = GridSpec::parse("1x16");
  const Field f = testutil::mean_free(testutil::random_field(g, 4));
  const auto h = make_hilbert(g, 0);
  CHECK(testutil::max_diff(apply(h, apply(h, f)), -1.0 * f) < 1e-13);
  const auto p = make_analytic_projection(g, 0, 1);
  const auto q = make_analytic_projection(g, 0, -1);
  CHECK(testutil::max_diff(apply(p, f) + apply(q, f), f) < 1e-13);
  // H = -i P + i Pperp
  const Field hf = cplx(0, -1) * apply(p, f) + cplx(0, 1) * apply(q, f);
  CHECK(testutil::max_diff(apply(h, f), hf) < 1e-13);
}

TEST_CASE("Riesz transforms square-sum to minus identity") {
  const auto g = GridSpec::parse("2x8,1x4");
  const Field f = testutil::random_field(g, 9);
  Field acc(g);
  for (int j = 1; j <= 2; ++j) {
    const auto r = make_riesz(g, 0, j);
    acc += apply(r, apply(r, f));
  }
  const Field mean0 = apply(make_mean_projection(g, 0), f);
  CHECK(testutil::max_diff(acc, -1.0 * (f - mean0)) < 1e-12);
  CHECK(symbol_gap(make_riesz(g, 0, 0), make_identity(g)) == 0.0);
  CHECK_THROWS_AS(make_riesz(g, 0, 3), Error);
  CHECK_THROWS_AS(make_hilbert(g, 0), Error);
}

TEST_CASE("adjoint pairing") {
  const auto g = GridSpec::parse("2x8");
  const auto m = make_random_multiplier(g, 21);
  CHECK(m.max_abs() <= 1.0);
  const Field f = testutil::random_field(g, 1), h = testutil::random_field(g, 2);
  const cplx lhs = inner_product(apply(m, f), h);
  const cplx rhs = inner_product(f, apply(adjoint(m), h));
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("cone projection picks frequencies by direction") {
  const auto g = GridSpec::parse("2x16");
  ConeSpec c;
  c.param = 0;
  c.direction = {1.0, 0.0};
  c.aperture = 0.5;
  const auto p = make_cone_projection(g, c);
  const auto freq = frequency_table(g);
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    const double n1 = freq[2 * i], n2 = freq[2 * i + 1];
    if (n1 == 0 && n2 == 0) continue;
    const double ang = std::atan2(std::abs(n2), n1);
    if (ang < 0.45) CHECK(p.symbol()[i] == cplx(1.0, 0.0));
    if (ang > 0.55) CHECK(p.symbol()[i] == cplx(0.0, 0.0));
  }
}

TEST_CASE("smooth cone lies between the cone and its dilate") {
  const auto g = GridSpec::parse("2x16");
  ConeSpec c;
  c.param = 0;
  c.direction = {0.6, 0.8};
  c.aperture = 0.6;
  c.tau = 0.2;
  const auto s = make_smooth_cone(g, c);
  const auto p = make_cone_projection(g, c);
  ConeSpec wide = c;
  wide.aperture = c.aperture * (1.0 + c.tau);
  const auto pw = make_cone_projection(g, wide);
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    CHECK(s.symbol()[i].real() >= p.symbol()[i].real() - 1e-15);
    CHECK(s.symbol()[i].real() <= pw.symbol()[i].real() + 1e-15);
  }
}

TEST_CASE("smoothstep endpoints") {
  for (int m = 0; m < 5; ++m) {
    CHECK(smoothstep(m, 0.0) == 0.0);
    CHECK(smoothstep(m, 1.0) == doctest::Approx(1.0));
    CHECK(smoothstep(m, 0.5) == doctest::Approx(0.5));
    CHECK(smoothstep(m, -1.0) == 0.0);
    CHECK(smoothstep(m, 2.0) == 1.0);
  }
}

TEST_CASE("tensor products require disjoint parameters") {
  const auto g = GridSpec::parse("1x8,1x8,1x8");
  const auto t = tensor({make_hilbert(g, 0), make_hilbert(g, 2)});
  CHECK(t.params() == std::set<std::size_t>{0, 2});
  const Field f = testutil::random_field(g, 3);
  CHECK(testutil::max_diff(apply(t, f), apply(make_hilbert(g, 0), apply(make_hilbert(g, 2), f))) < 1e-13);
  CHECK_THROWS_AS(tensor({make_hilbert(g, 0), make_hilbert(g, 0)}), Error);
}

TEST_CASE("compact grammar examples") {
  const auto r = parse_multiplier_descriptor("riesz:k=1,j=2");
  CHECK(r["kind"] == "riesz");
  CHECK(r["k"] == 1);
  CHECK(r["j"] == 2);
  const auto s = parse_multiplier_descriptor("scone:k=1,dir=[1,0],r=0.6,tau=0.2");
  CHECK(s["kind"] == "smooth_cone");
  CHECK(s["dir"][0].get<double>() == 1.0);
  const auto t = parse_multiplier_descriptor("tensor(riesz:k=1,j=1 ; riesz:k=3,j=2)");
  CHECK(t["kind"] == "tensor");
  CHECK(t["factors"].size() == 2);
  CHECK_THROWS_AS(parse_multiplier_descriptor("tensor(riesz:k=1,j=1"), Error);
  CHECK_THROWS_AS(parse_multiplier_descriptor("riesz:k"), Error);
}

TEST_CASE("descriptors rebuild the same symbol") {
  const auto g = GridSpec::parse("2x8,1x8,2x8");
  ConeSpec c;
  c.param = 2;
  c.direction = {0.0, 1.0};
  c.aperture = 0.7;
  const std::vector<Multiplier> ms = {
      make_riesz(g, 0, 2),
      make_hilbert(g, 1),
      make_smooth_cone(g, c),
      make_cone_projection(g, c),
      tensor({make_riesz(g, 0, 1), make_hilbert(g, 1)}),
      make_random_multiplier(g, 5, {1}),
  };
  for (const auto& m : ms) {
    const auto rebuilt = build_multiplier(g, m.descriptor());
    CHECK(symbol_gap(m, rebuilt) == 0.0);
    CHECK(rebuilt.params() == m.params());
  }
  const auto from_text = build_multiplier(g, parse_multiplier_descriptor("tensor(riesz:k=1,j=1;hilbert:k=2)"));
  CHECK(symbol_gap(from_text, ms[4]) == 0.0);
}
