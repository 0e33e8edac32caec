#include "commlab/zonal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "commlab/rng.hpp"

namespace commlab {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_unit(std::span<const double> v, double tol, const std::string& what) {
  require(std::isfinite(norm2(v)) && std::abs(norm2(v) - 1.0) <= tol, ErrorCode::kInvalidArgument,
          what + " must be a unit vector");
}

std::vector<double> padded(std::span<const double> v, int d) {
  require(static_cast<int>(v.size()) <= d, ErrorCode::kInvalidArgument,
          "vector dimension exceeds the embedding dimension");
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

double clamp_cos(double t) { return std::clamp(t, -1.0, 1.0); }

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_q.
struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss_rule(int q) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(q));
  r.w.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[static_cast<std::size_t>(i)] = -x;
    r.x[static_cast<std::size_t>(q - 1 - i)] = x;
    r.w[static_cast<std::size_t>(i)] = w;
    r.w[static_cast<std::size_t>(q - 1 - i)] = w;
  }
  return cache.emplace(q, std::move(r)).first->second;
}

// int_0^pi Z_n(cos th)^2 sin^{d-2}(th) dth.
double zonal_norm_sq(int n, int d) {
  if (d == 2) return n == 0 ? kPi : kPi / 2.0;
  const double lam = (d - 2) / 2.0;
  // h_n for unnormalized C_n^lam, divided by C_n^lam(1)^2.
  const double log_h = std::log(kPi) + (1.0 - 2.0 * lam) * std::log(2.0) + std::lgamma(n + 2.0 * lam) -
                       std::lgamma(n + 1.0) - std::log(n + lam) - 2.0 * std::lgamma(lam);
  const double log_c1 = std::lgamma(n + 2.0 * lam) - std::lgamma(n + 1.0) - std::lgamma(2.0 * lam);
  return std::exp(log_h - 2.0 * log_c1);
}

// Uniform point on the sub-sphere {a : d(pole, a) = theta} of S^{d-1}.
class SubSphereSampler {
 public:
  SubSphereSampler(std::span<const double> pole, double theta)
      : pole_(pole.begin(), pole.end()), c_(std::cos(theta)), s_(std::sin(theta)),
        basis_(orthogonal_complement(pole)) {}

  void draw(Rng& rng, std::vector<double>& out) const {
    const std::size_t d = pole_.size();
    out.assign(d, 0.0);
    std::vector<double> g(basis_.size());
    double n = 0.0;
    while (n < 1e-300) {
      n = 0.0;
      for (auto& x : g) {
        x = standard_normal(rng);
        n += x * x;
      }
    }
    n = std::sqrt(n);
    for (std::size_t i = 0; i < d; ++i) out[i] = c_ * pole_[i];
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const double coef = s_ * g[j] / n;
      for (std::size_t i = 0; i < d; ++i) out[i] += coef * basis_[j][i];
    }
  }

 private:
  std::vector<double> pole_;
  double c_, s_;
  std::vector<std::vector<double>> basis_;
};

// The at most two points of a sub-sphere of S^1.
std::vector<std::vector<double>> circle_points(std::span<const double> pole, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const std::vector<double> e{-pole[1], pole[0]};
  std::vector<std::vector<double>> out;
  out.push_back({c * pole[0] + s * e[0], c * pole[1] + s * e[1]});
  if (theta > 1e-12 && theta < kPi - 1e-12) out.push_back({c * pole[0] - s * e[0], c * pole[1] - s * e[1]});
  return out;
}

constexpr std::uint64_t kChunk = 1 << 16;

template <class SampleFn>
McEstimate chunked_mean(std::uint64_t samples, std::uint64_t seed, SampleFn&& sample) {
  double sum = 0.0, sum_sq = 0.0;
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    Rng rng(derive_seed(seed, c));
    const std::uint64_t len = std::min(kChunk, samples - c * kChunk);
    double cs = 0.0, css = 0.0;
    for (std::uint64_t i = 0; i < len; ++i) {
      const double v = sample(rng);
      cs += v;
      css += v * v;
    }
    sum += cs;
    sum_sq += css;
  }
  McEstimate e;
  e.samples = samples;
  const double n = static_cast<double>(samples);
  e.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq - n * e.estimate * e.estimate) / std::max(1.0, n - 1.0));
  e.standard_error = std::sqrt(var / n);
  return e;
}

}  // namespace

void zonal_values(int n_max, int d, double t, std::span<double> out) {
  require(n_max >= 0 && static_cast<int>(out.size()) >= n_max + 1, ErrorCode::kInvalidArgument,
          "zonal_values: output too short");
  require(d >= 2, ErrorCode::kInvalidArgument, "zonal harmonics need d >= 2");
  require(std::isfinite(t) && std::abs(t) <= 1.0 + 1e-12, ErrorCode::kInvalidArgument,
          "zonal argument outside [-1,1]");
  t = clamp_cos(t);
  const double lam = (d - 2) / 2.0;
  out[0] = 1.0;
  if (n_max == 0) return;
  out[1] = t;
  for (int n = 1; n < n_max; ++n) {
    out[static_cast<std::size_t>(n + 1)] =
        (2.0 * (n + lam) * t * out[static_cast<std::size_t>(n)] - n * out[static_cast<std::size_t>(n - 1)]) /
        (n + 2.0 * lam);
  }
}

double zonal_eval(int n, int d, double t) {
  require(n >= 0, ErrorCode::kInvalidArgument, "zonal degree must be >= 0");
  std::vector<double> v(static_cast<std::size_t>(n + 1));
  zonal_values(n, d, t, v);
  return v.back();
}

void PhiProfile::validate() const {
  require(0.0 < b && b < a && a < 1.0, ErrorCode::kInvalidArgument, "profile needs 0 < b < a < 1");
  require(smoothness >= 1, ErrorCode::kInvalidArgument, "profile smoothness must be >= 1");
}

double PhiProfile::operator()(double t) const {
  const double s = std::abs(t);
  double v;
  if (s <= b) {
    v = 0.0;
  } else if (s >= a) {
    v = 1.0;
  } else {
    v = smoothstep(smoothness, (s - b) / (a - b));
  }
  return t < 0.0 ? -v : v;
}

double PhiProfile::plateau_radius() const { return kPi / 2.0 * (1.0 - a); }

double ZonalCoefficients::eval(double t) const {
  std::vector<double> z(values.size());
  zonal_values(degree, dimension, t, z);
  double s = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) s += values[n] * z[n];
  return s;
}

ZonalCoefficients zonal_coefficients(const std::function<double(double)>& g, int d, int degree,
                                     std::vector<double> breakpoints) {
  require(d >= 2, ErrorCode::kInvalidArgument, "zonal expansion needs d >= 2");
  require(degree >= 1, ErrorCode::kInvalidArgument, "zonal expansion needs N >= 1");
  std::vector<double> cuts{0.0, kPi};
  for (double bp : breakpoints) {
    require(std::abs(bp) <= 1.0, ErrorCode::kInvalidArgument, "breakpoint outside [-1,1]");
    cuts.push_back(std::acos(bp));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return y - x < 1e-14; }),
             cuts.end());

  const auto n_terms = static_cast<std::size_t>(degree + 1);
  std::vector<double> h(n_terms);
  for (int n = 0; n <= degree; ++n) h[static_cast<std::size_t>(n)] = zonal_norm_sq(n, d);

  double residual = 0.0;
  std::vector<double> prev;
  for (int q = std::max(16, degree + 8); q <= 4096; q *= 2) {
    const auto& rule = gauss_rule(q);
    std::vector<double> proj(n_terms, 0.0), gram(n_terms, 0.0), z(n_terms);
    double cross = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double lo = cuts[p], hi = cuts[p + 1];
      const double half = (hi - lo) / 2.0, mid = (hi + lo) / 2.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double th = mid + half * rule.x[i];
        const double w = rule.w[i] * half * std::pow(std::sin(th), d - 2);
        const double t = std::cos(th);
        zonal_values(degree, d, t, z);
        const double gv = g(t);
        for (std::size_t n = 0; n < n_terms; ++n) {
          proj[n] += w * gv * z[n];
          gram[n] += w * z[n] * z[n];
        }
        cross += w * z[n_terms - 1] * z[n_terms - 2];
      }
    }
    residual = std::abs(cross) / h.back();
    for (std::size_t n = 0; n < n_terms; ++n) residual = std::max(residual, std::abs(gram[n] - h[n]) / h[n]);
    std::vector<double> coef(n_terms);
    for (std::size_t n = 0; n < n_terms; ++n) coef[n] = proj[n] / h[n];
    // Accept once the Gram residual is met and doubling no longer moves g's coefficients.
    double drift = prev.empty() ? 1.0 : 0.0;
    for (std::size_t n = 0; n < prev.size(); ++n) drift = std::max(drift, std::abs(coef[n] - prev[n]));
    prev = coef;
    if (residual <= 1e-10 && drift <= 1e-12) {
      ZonalCoefficients c;
      c.dimension = d;
      c.degree = degree;
      c.values = std::move(coef);
      c.quadrature_residual = residual;
      c.nodes_per_panel = q;
      return c;
    }
  }
  throw Error(ErrorCode::kNotConverged,
              "zonal quadrature did not reach 1e-10 (residual " + std::to_string(residual) + ")");
}

ZonalCoefficients phi_coefficients(const PhiProfile& profile, int d, int degree) {
  profile.validate();
  return zonal_coefficients([&](double t) { return profile(t); }, d, degree,
                            {-profile.a, -profile.b, profile.b, profile.a});
}

double truncation_error(const ZonalCoefficients& c, const PhiProfile& profile, bool away_from_transitions) {
  constexpr int kSamples = 4000;
  std::vector<double> z(c.values.size());
  double worst = 0.0;
  auto probe = [&](double t) {
    const double s = std::abs(t);
    if (away_from_transitions && s > profile.b && s < profile.a) return;
    zonal_values(c.degree, c.dimension, t, z);
    double v = 0.0;
    for (std::size_t n = 0; n < z.size(); ++n) v += c.values[n] * z[n];
    worst = std::max(worst, std::abs(v - profile(t)));
  };
  // Uniform in t and in the angle; the angle grid resolves the endpoints.
  for (int i = 0; i <= kSamples; ++i) {
    probe(-1.0 + 2.0 * i / kSamples);
    probe(std::cos(kPi * i / kSamples));
  }
  for (double t : {profile.a, profile.b, -profile.a, -profile.b}) probe(t);
  return worst;
}

JourneConeSpec journe_spec_from_json(const nlohmann::json& d) {
  try {
    JourneConeSpec s;
    const auto& k = d.at("k");
    std::vector<int> ks = k.is_array() ? k.get<std::vector<int>>() : std::vector<int>{k.get<int>()};
    for (int x : ks) {
      require(x >= 1, ErrorCode::kInvalidArgument, "parameter index k is 1-based");
      s.params.push_back(static_cast<std::size_t>(x - 1));
    }
    s.directions = d.at("dirs").get<std::vector<std::vector<double>>>();
    for (auto& v : s.directions) {
      const double n = norm2(v);
      require(n > 0.0 && std::isfinite(n), ErrorCode::kInvalidArgument, "Journe direction must be nonzero");
      for (auto& x : v) x /= n;
    }
    s.profile.a = d.value("a", s.profile.a);
    s.profile.b = d.value("b", s.profile.b);
    s.profile.smoothness = d.value("m", s.profile.smoothness);
    s.degree = d.value("N", s.degree);
    s.embedding_dimension = d.value("dim", 0);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad journe_cone descriptor: ") + e.what());
  }
}

nlohmann::json journe_spec_to_json(const JourneConeSpec& s) {
  json ks = json::array();
  for (auto k : s.params) ks.push_back(k + 1);
  return {{"kind", "journe_cone"}, {"k", ks},           {"dirs", s.directions},
          {"a", s.profile.a},      {"b", s.profile.b},  {"m", s.profile.smoothness},
          {"N", s.degree},         {"dim", s.embedding_dimension}};
}

JourneCone::JourneCone(JourneConeSpec spec) : spec_(std::move(spec)) {
  require(!spec_.directions.empty(), ErrorCode::kInvalidArgument, "Journe cone needs at least one direction");
  require(spec_.params.empty() || spec_.params.size() == spec_.directions.size(), ErrorCode::kInvalidArgument,
          "one direction per parameter");
  int dmax = 2;
  for (const auto& v : spec_.directions) {
    require_unit(v, 1e-12, "Journe direction");
    dmax = std::max(dmax, static_cast<int>(v.size()));
  }
  dim_ = spec_.embedding_dimension > 0 ? spec_.embedding_dimension : dmax;
  require(dim_ >= dmax, ErrorCode::kInvalidArgument, "embedding dimension smaller than a direction");
  coeffs_ = phi_coefficients(spec_.profile, dim_, spec_.degree);
  delta_ = truncation_error(coeffs_, spec_.profile);
}

double JourneCone::eval_cosines(std::span<const double> cosines) const {
  require(cosines.size() == spec_.directions.size(), ErrorCode::kInvalidArgument,
          "one eta per Journe direction");
  const auto n_terms = coeffs_.values.size();
  std::vector<double> prod(n_terms, 1.0), z(n_terms);
  for (double t : cosines) {
    zonal_values(coeffs_.degree, dim_, t, z);
    for (std::size_t n = 0; n < n_terms; ++n) prod[n] *= z[n];
  }
  double s = 0.0;
  for (std::size_t n = 0; n < n_terms; ++n) s += coeffs_.values[n] * prod[n];
  return s;
}

double JourneCone::eval(const std::vector<std::vector<double>>& etas) const {
  require(etas.size() == spec_.directions.size(), ErrorCode::kInvalidArgument, "one eta per Journe direction");
  std::vector<double> t(etas.size());
  for (std::size_t k = 0; k < etas.size(); ++k) {
    require_unit(etas[k], 1e-10, "eta");
    require(static_cast<int>(etas[k].size()) <= dim_, ErrorCode::kInvalidArgument,
            "eta dimension exceeds the embedding dimension");
    t[k] = clamp_cos(dot(spec_.directions[k], etas[k]));
  }
  return eval_cosines(t);
}

double journe_cone_eval(const JourneCone& cone, const std::vector<std::vector<double>>& etas) {
  return cone.eval(etas);
}

McEstimate mc_conditional_expectation(int n, int d, std::span<const double> xi1, std::span<const double> xi2,
                                      std::span<const double> eta1, std::span<const double> eta2,
                                      std::uint64_t samples, std::uint64_t seed) {
  require(d >= 2 && n >= 0, ErrorCode::kInvalidArgument, "need d >= 2 and n >= 0");
  require(samples >= 10000, ErrorCode::kInvalidArgument, "sample count must be >= 1e4");
  for (auto v : {xi1, xi2, eta1, eta2}) require_unit(v, 1e-12, "conditioning vector");
  const auto x1 = padded(xi1, d), x2 = padded(xi2, d), e1 = padded(eta1, d), e2 = padded(eta2, d);
  const double theta = std::acos(clamp_cos(dot(x2, e2)));

  McEstimate exact;
  exact.samples = samples;
  exact.exact = true;
  if (n == 0) {
    exact.estimate = 1.0;
    return exact;
  }
  if (theta <= 1e-12 || theta >= kPi - 1e-12 || d == 2) {
    // One-point (degenerate) or two-point (circle) sub-sphere.
    std::vector<std::vector<double>> pts;
    if (d == 2) {
      pts = circle_points(x1, theta);
    } else {
      std::vector<double> a(x1);
      if (theta > kPi / 2.0) for (auto& x : a) x = -x;
      pts.push_back(a);
    }
    double s = 0.0;
    for (const auto& a : pts) s += zonal_eval(n, d, clamp_cos(dot(e1, a)));
    exact.estimate = s / static_cast<double>(pts.size());
    return exact;
  }
  const SubSphereSampler sampler(x1, theta);
  std::vector<double> z(static_cast<std::size_t>(n + 1)), a;
  return chunked_mean(samples, seed, [&](Rng& rng) {
    sampler.draw(rng, a);
    zonal_values(n, d, clamp_cos(dot(e1, a)), z);
    return z.back();
  });
}

namespace {

double c1_value(const JourneCone& cone, bool truncated, double t) {
  return truncated ? cone.coefficients().eval(clamp_cos(t)) : cone.spec().profile(clamp_cos(t));
}

// Exact average over the d = 2 sub-sphere tree.
double circle_construction(const JourneCone& cone, bool truncated, std::vector<std::vector<double>> poles,
                           const std::vector<std::vector<double>>& etas, std::size_t i) {
  if (i == 1) return c1_value(cone, truncated, dot(poles[0], etas[0]));
  const double theta = std::acos(clamp_cos(dot(poles[i - 1], etas[i - 1])));
  const auto pts = circle_points(poles[i - 2], theta);
  double s = 0.0;
  for (const auto& a : pts) {
    poles[i - 2] = a;
    s += circle_construction(cone, truncated, poles, etas, i - 1);
  }
  return s / static_cast<double>(pts.size());
}

}  // namespace

McEstimate iterated_expectation_cone(const JourneCone& cone, const std::vector<std::vector<double>>& etas,
                                     std::uint64_t samples, std::uint64_t seed, bool truncated) {
  const auto& dirs = cone.spec().directions;
  require(etas.size() == dirs.size(), ErrorCode::kInvalidArgument, "one eta per Journe direction");
  const int d = cone.dimension();
  std::vector<std::vector<double>> poles, es;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    require_unit(etas[k], 1e-10, "eta");
    poles.push_back(padded(dirs[k], d));
    es.push_back(padded(etas[k], d));
  }
  const std::size_t i = dirs.size();
  if (d == 2 || i == 1) {
    McEstimate e;
    e.samples = samples;
    e.exact = true;
    e.estimate = circle_construction(cone, truncated, poles, es, d == 2 ? i : 1);
    return e;
  }
  require(samples >= 1, ErrorCode::kInvalidArgument, "sample count must be positive");
  std::vector<double> a;
  return chunked_mean(samples, seed, [&](Rng& rng) {
    auto p = poles;
    for (std::size_t level = i; level > 1; --level) {
      const double theta = std::acos(clamp_cos(dot(p[level - 1], es[level - 1])));
      SubSphereSampler(p[level - 2], theta).draw(rng, a);
      p[level - 2] = a;
    }
    return c1_value(cone, truncated, dot(p[0], es[0]));
  });
}

JourneMultiplier journe_multiplier_certified(const JourneConeSpec& spec, const GridSpec& grid) {
  require(!spec.params.empty() && spec.params.size() == spec.directions.size(), ErrorCode::kInvalidArgument,
          "Journe multiplier needs one direction per listed parameter");
  std::set<std::size_t> ps;
  for (std::size_t j = 0; j < spec.params.size(); ++j) {
    const std::size_t k = spec.params[j];
    require(k < grid.param_count(), ErrorCode::kInvalidArgument,
            "parameter index " + std::to_string(k + 1) + " not in grid");
    require(static_cast<int>(spec.directions[j].size()) == grid.param(k).dim, ErrorCode::kInvalidArgument,
            "Journe direction dimension must match d_k");
    require(ps.insert(k).second, ErrorCode::kInvalidArgument, "repeated parameter in Journe cone");
  }
  JourneConeSpec full = spec;
  if (full.embedding_dimension == 0) {
    int dmax = 2;
    for (std::size_t k = 0; k < grid.param_count(); ++k) dmax = std::max(dmax, grid.param(k).dim);
    full.embedding_dimension = dmax;
  }
  const JourneCone cone(full);
  const auto& c = cone.coefficients();
  const auto n_terms = c.values.size();

  // Per parameter: zonal table and geodesic distance for each local point.
  const std::size_t m = spec.params.size();
  std::vector<std::vector<double>> ztab(m), dist(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = spec.params[j];
    const int dk = grid.param(k).dim, nk = grid.param(k).points;
    const std::size_t np = grid.param_points(k);
    ztab[j].assign(np * n_terms, 0.0);
    dist[j].assign(np, -1.0);
    std::vector<double> eta(static_cast<std::size_t>(dk));
    for (std::size_t q = 0; q < np; ++q) {
      std::size_t rest = q;
      for (int a = dk - 1; a >= 0; --a) {
        eta[static_cast<std::size_t>(a)] = axis_frequency(static_cast<int>(rest % nk), nk);
        rest /= static_cast<std::size_t>(nk);
      }
      const double len = norm2(eta);
      if (len == 0.0) continue;
      const double t = clamp_cos(dot(spec.directions[j], eta) / len);
      zonal_values(c.degree, cone.dimension(), t, std::span<double>(ztab[j].data() + q * n_terms, n_terms));
      dist[j][q] = std::acos(t);
    }
  }

  PlateauCertificate cert;
  cert.radius = spec.profile.plateau_radius();
  cert.delta = cone.delta();
  std::vector<cplx> symbol(grid.total_points());
  std::vector<std::size_t> local(grid.param_count());
  std::vector<double> prod(n_terms);
  for (std::size_t flat = 0; flat < grid.total_points(); ++flat) {
    grid.split(flat, local);
    bool zero = false;
    double dsum = 0.0;
    std::fill(prod.begin(), prod.end(), 1.0);
    for (std::size_t j = 0; j < m && !zero; ++j) {
      const std::size_t q = local[spec.params[j]];
      if (dist[j][q] < 0.0) {
        zero = true;
        break;
      }
      dsum += dist[j][q];
      const double* zq = ztab[j].data() + q * n_terms;
      for (std::size_t n = 0; n < n_terms; ++n) prod[n] *= zq[n];
    }
    if (zero) continue;
    double v = 0.0;
    for (std::size_t n = 0; n < n_terms; ++n) v += c.values[n] * prod[n];
    symbol[flat] = v;
    if (dsum < cert.radius) {
      ++cert.plateau_points;
      cert.max_plateau_deviation = std::max(cert.max_plateau_deviation, std::abs(v - 1.0));
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double dj = dist[j][local[spec.params[j]]];
      if (dsum - dj + (kPi - dj) < cert.radius) {
        ++cert.flipped_points;
        cert.max_flipped_deviation = std::max(cert.max_flipped_deviation, std::abs(v + 1.0));
      }
    }
  }
  json desc = journe_spec_to_json(spec);
  return {Multiplier(grid, std::move(symbol), ps, desc), cert};
}

Multiplier journe_multiplier(const JourneConeSpec& spec, const GridSpec& grid) {
  return journe_multiplier_certified(spec, grid).multiplier;
}

}  // namespace commlab
