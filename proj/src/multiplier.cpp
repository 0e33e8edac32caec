#include "commlab/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "commlab/rng.hpp"
#include "commlab/zonal.hpp"

namespace commlab {

namespace {

using nlohmann::json;

constexpr cplx kI{0.0, 1.0};

void check_param(const GridSpec& spec, std::size_t k) {
  require(k < spec.param_count(), ErrorCode::kInvalidArgument,
          "parameter index " + std::to_string(k + 1) + " not in grid");
}

// Calls fn(flat, freq_of_param_k) for each lattice point, with the integer
// frequency vector of parameter k as a span of d_k ints.
template <class Fn>
void for_each_param_frequency(const GridSpec& spec, std::size_t k, Fn&& fn) {
  const auto table = frequency_table(spec);
  const std::size_t rank = spec.axis_count();
  const std::size_t first = spec.first_axis(k);
  const auto dk = static_cast<std::size_t>(spec.param(k).dim);
  for (std::size_t flat = 0; flat < spec.total_points(); ++flat) {
    fn(flat, std::span<const int>(table.data() + flat * rank + first, dk));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<std::vector<double>> orthogonal_complement(std::span<const double> dir) {
  const std::size_t d = dir.size();
  std::vector<std::vector<double>> basis;
  for (std::size_t e = 0; e < d && basis.size() + 1 < d; ++e) {
    std::vector<double> v(d, 0.0);
    v[e] = 1.0;
    const double c = dot(v, dir);
    for (std::size_t i = 0; i < d; ++i) v[i] -= c * dir[i];
    for (const auto& b : basis) {
      const double cb = dot(v, b);
      for (std::size_t i = 0; i < d; ++i) v[i] -= cb * b[i];
    }
    const double n = std::sqrt(dot(v, v));
    if (n < 1e-8) continue;
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

namespace {

json cone_json(const ConeSpec& c, bool smooth) {
  json j = {{"kind", smooth ? "smooth_cone" : "cone"},
            {"k", c.param + 1},
            {"dir", c.direction},
            {"r", c.aperture},
            {"base", c.base == ConeBase::kBall ? "ball" : "cube"}};
  if (smooth) {
    j["tau"] = c.tau;
    j["m"] = c.smoothness;
  }
  return j;
}

}  // namespace

Multiplier::Multiplier(GridSpec spec, std::vector<cplx> symbol, std::set<std::size_t> params,
                       nlohmann::json descriptor)
    : spec_(std::move(spec)),
      symbol_(std::move(symbol)),
      params_(std::move(params)),
      descriptor_(std::move(descriptor)) {
  require(symbol_.size() == spec_.total_points(), ErrorCode::kSpecMismatch,
          "symbol size does not match grid");
}

double Multiplier::max_abs() const {
  double m = 0.0;
  for (const auto& z : symbol_) m = std::max(m, std::abs(z));
  return m;
}

Multiplier make_identity(const GridSpec& spec) {
  return Multiplier(spec, std::vector<cplx>(spec.total_points(), 1.0), {}, {{"kind", "identity"}});
}

Multiplier make_hilbert(const GridSpec& spec, std::size_t k, HilbertSign sign) {
  check_param(spec, k);
  require(spec.param(k).dim == 1, ErrorCode::kInvalidArgument,
          "Hilbert transform needs a one-dimensional parameter");
  const double s = sign == HilbertSign::kMinusI ? -1.0 : 1.0;
  std::vector<cplx> sym(spec.total_points());
  for_each_param_frequency(spec, k, [&](std::size_t flat, std::span<const int> n) {
    const int sg = (n[0] > 0) - (n[0] < 0);
    sym[flat] = s * kI * static_cast<double>(sg);
  });
  json desc = {{"kind", "hilbert"}, {"k", k + 1}};
  if (sign == HilbertSign::kPlusI) desc["sign"] = "+i";
  return Multiplier(spec, std::move(sym), {k}, std::move(desc));
}

Multiplier make_riesz(const GridSpec& spec, std::size_t k, int j) {
  check_param(spec, k);
  const int dk = spec.param(k).dim;
  require(j >= 0 && j <= dk, ErrorCode::kInvalidArgument,
          "Riesz direction " + std::to_string(j) + " exceeds parameter dimension " +
              std::to_string(dk));
  if (j == 0) {
    Multiplier id = make_identity(spec);
    return Multiplier(spec, std::vector<cplx>(id.symbol().begin(), id.symbol().end()), {},
                      {{"kind", "riesz"}, {"k", k + 1}, {"j", 0}});
  }
  std::vector<cplx> sym(spec.total_points());
  for_each_param_frequency(spec, k, [&](std::size_t flat, std::span<const int> n) {
    double r2 = 0.0;
    for (int v : n) r2 += static_cast<double>(v) * v;
    sym[flat] = r2 == 0.0 ? cplx(0.0) : -kI * (n[j - 1] / std::sqrt(r2));
  });
  return Multiplier(spec, std::move(sym), {k}, {{"kind", "riesz"}, {"k", k + 1}, {"j", j}});
}

Multiplier make_analytic_projection(const GridSpec& spec, std::size_t k, int sign) {
  check_param(spec, k);
  require(spec.param(k).dim == 1, ErrorCode::kInvalidArgument,
          "analytic projection needs a one-dimensional parameter");
  require(sign == 1 || sign == -1, ErrorCode::kInvalidArgument, "projection sign must be +1 or -1");
  std::vector<cplx> sym(spec.total_points());
  for_each_param_frequency(spec, k, [&](std::size_t flat, std::span<const int> n) {
    sym[flat] = (sign > 0 ? n[0] > 0 : n[0] < 0) ? 1.0 : 0.0;
  });
  return Multiplier(spec, std::move(sym), {k}, {{"kind", "projection"}, {"k", k + 1}, {"sign", sign}});
}

Multiplier make_mean_projection(const GridSpec& spec, std::size_t k) {
  check_param(spec, k);
  std::vector<cplx> sym(spec.total_points());
  for_each_param_frequency(spec, k, [&](std::size_t flat, std::span<const int> n) {
    sym[flat] = std::all_of(n.begin(), n.end(), [](int v) { return v == 0; }) ? 1.0 : 0.0;
  });
  return Multiplier(spec, std::move(sym), {k}, {{"kind", "mean"}, {"k", k + 1}});
}

void ConeSpec::validate(const GridSpec& spec) const {
  check_param(spec, param);
  require(direction.size() == static_cast<std::size_t>(spec.param(param).dim),
          ErrorCode::kInvalidArgument, "cone direction has wrong dimension");
  const double n = std::sqrt(dot(direction, direction));
  require(std::abs(n - 1.0) <= 1e-12, ErrorCode::kInvalidArgument, "cone direction must be a unit vector");
  require(std::isfinite(aperture) && aperture > 0.0, ErrorCode::kInvalidArgument,
          "cone aperture must be positive");
  if (base == ConeBase::kBall) {
    require(aperture < std::numbers::pi / 2, ErrorCode::kInvalidArgument,
            "ball cone aperture must be < pi/2");
  }
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be positive");
  require(smoothness >= 0, ErrorCode::kInvalidArgument, "smoothness must be >= 0");
}

double smoothstep(int m, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // x^{m+1} sum_{j=0}^{m} C(m+j, j) (1-x)^j
  double sum = 0.0, binom = 1.0, pw = 1.0;
  for (int j = 0; j <= m; ++j) {
    sum += binom * pw;
    binom = binom * (m + j + 1) / (j + 1);
    pw *= 1.0 - x;
  }
  return std::pow(x, m + 1) * sum;
}

double geodesic_distance(std::span<const double> a, std::span<const double> b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

double cone_gauge(const ConeSpec& cone, std::span<const double> eta) {
  const double norm = std::sqrt(dot(eta, eta));
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  if (cone.base == ConeBase::kBall) {
    std::vector<double> u(eta.begin(), eta.end());
    for (auto& x : u) x /= norm;
    return geodesic_distance(u, cone.direction) / cone.aperture;
  }
  const double along = dot(eta, cone.direction);
  if (along <= 0.0) return std::numeric_limits<double>::infinity();
  double across = 0.0;
  for (const auto& e : orthogonal_complement(cone.direction)) across = std::max(across, std::abs(dot(eta, e)));
  return across / (cone.aperture * along);
}

namespace {

template <class ValueFn>
std::vector<cplx> cone_symbol(const GridSpec& spec, const ConeSpec& cone, ValueFn&& value) {
  std::vector<cplx> sym(spec.total_points());
  std::vector<double> eta(static_cast<std::size_t>(spec.param(cone.param).dim));
  for_each_param_frequency(spec, cone.param, [&](std::size_t flat, std::span<const int> n) {
    bool zero = true;
    for (std::size_t a = 0; a < n.size(); ++a) {
      eta[a] = n[a];
      zero = zero && n[a] == 0;
    }
    sym[flat] = zero ? 0.0 : value(cone_gauge(cone, eta));
  });
  return sym;
}

}  // namespace

Multiplier make_cone_projection(const GridSpec& spec, const ConeSpec& cone) {
  cone.validate(spec);
  auto sym = cone_symbol(spec, cone, [](double g) { return g <= 1.0 ? 1.0 : 0.0; });
  return Multiplier(spec, std::move(sym), {cone.param}, cone_json(cone, false));
}

Multiplier make_smooth_cone(const GridSpec& spec, const ConeSpec& cone) {
  cone.validate(spec);
  if (cone.base == ConeBase::kBall) {
    require((1.0 + cone.tau) * cone.aperture < std::numbers::pi / 2, ErrorCode::kInvalidArgument,
            "(1+tau) r must stay below pi/2 so that opposing cones are disjoint");
  }
  int m = cone.smoothness;
  if (m == 0) {
    for (const auto& p : spec.params()) m = std::max(m, p.dim);
  }
  const double tau = cone.tau;
  auto sym = cone_symbol(spec, cone, [&](double g) { return 1.0 - smoothstep(m, (g - 1.0) / tau); });
  ConeSpec resolved = cone;
  resolved.smoothness = m;
  return Multiplier(spec, std::move(sym), {cone.param}, cone_json(resolved, true));
}

Multiplier make_random_multiplier(const GridSpec& spec, std::uint64_t seed,
                                  std::set<std::size_t> params) {
  if (params.empty()) {
    for (std::size_t k = 0; k < spec.param_count(); ++k) params.insert(k);
  }
  for (auto k : params) check_param(spec, k);
  // draw one value per frequency block of the chosen parameters
  Rng rng(mix_seed(seed));
  const std::size_t n = spec.total_points();
  std::vector<std::size_t> per(spec.param_count());
  std::map<std::vector<std::size_t>, cplx> values;
  std::vector<cplx> sym(n);
  for (std::size_t flat = 0; flat < n; ++flat) {
    spec.split(flat, per);
    std::vector<std::size_t> key;
    for (auto k : params) key.push_back(per[k]);
    auto it = values.find(key);
    if (it == values.end()) {
      const double r = std::sqrt(uniform01(rng));
      const double th = 2.0 * std::numbers::pi * uniform01(rng);
      it = values.emplace(key, std::polar(r, th)).first;
    }
    sym[flat] = it->second;
  }
  json plist = json::array();
  for (auto k : params) plist.push_back(k + 1);
  return Multiplier(spec, std::move(sym), params,
                    {{"kind", "random"}, {"seed", seed}, {"params", plist}});
}

Multiplier tensor(const std::vector<Multiplier>& ms) {
  require(!ms.empty(), ErrorCode::kInvalidArgument, "tensor of no multipliers");
  const GridSpec& spec = ms.front().spec();
  std::set<std::size_t> used;
  std::vector<cplx> sym(spec.total_points(), 1.0);
  json factors = json::array();
  for (const auto& m : ms) {
    require(m.spec() == spec, ErrorCode::kSpecMismatch, "tensor factors live on different grids");
    for (auto k : m.params()) {
      require(used.insert(k).second, ErrorCode::kInvalidArgument,
              "tensor factors overlap in parameter " + std::to_string(k + 1));
    }
    for (std::size_t i = 0; i < sym.size(); ++i) sym[i] *= m.symbol()[i];
    factors.push_back(m.descriptor());
  }
  return Multiplier(spec, std::move(sym), std::move(used), {{"kind", "tensor"}, {"factors", factors}});
}

Multiplier compose(const Multiplier& a, const Multiplier& b) {
  require(a.spec() == b.spec(), ErrorCode::kSpecMismatch, "compose: grids differ");
  std::vector<cplx> sym(a.symbol().size());
  for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = a.symbol()[i] * b.symbol()[i];
  std::set<std::size_t> ps = a.params();
  ps.insert(b.params().begin(), b.params().end());
  return Multiplier(a.spec(), std::move(sym), std::move(ps),
                    {{"kind", "compose"}, {"factors", {a.descriptor(), b.descriptor()}}});
}

Multiplier adjoint(const Multiplier& m) {
  std::vector<cplx> sym(m.symbol().begin(), m.symbol().end());
  for (auto& z : sym) z = std::conj(z);
  return Multiplier(m.spec(), std::move(sym), m.params(), {{"kind", "adjoint"}, {"of", m.descriptor()}});
}

Field apply(const Multiplier& m, const Field& f) {
  require(m.spec() == f.spec(), ErrorCode::kSpecMismatch, "apply: multiplier and field grids differ");
  FreqField F = forward_transform(f);
  for (std::size_t i = 0; i < F.coefficients().size(); ++i) F[i] *= m.symbol()[i];
  return inverse_transform(F);
}

namespace {

std::size_t param_index(const json& d) {
  const int k = d.at("k").get<int>();
  require(k >= 1, ErrorCode::kInvalidArgument, "parameter index k is 1-based");
  return static_cast<std::size_t>(k - 1);
}

ConeSpec cone_from_json(const json& d) {
  ConeSpec c;
  c.param = param_index(d);
  c.direction = d.at("dir").get<std::vector<double>>();
  c.aperture = d.at("r").get<double>();
  const std::string base = d.value("base", "ball");
  require(base == "ball" || base == "cube", ErrorCode::kInvalidArgument, "cone base must be ball or cube");
  c.base = base == "ball" ? ConeBase::kBall : ConeBase::kCube;
  c.tau = d.value("tau", 0.2);
  c.smoothness = d.value("m", 0);
  return c;
}

}  // namespace

Multiplier build_multiplier(const GridSpec& spec, const nlohmann::json& d) {
  try {
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "identity") return make_identity(spec);
    if (kind == "hilbert") {
      const auto sign = d.value("sign", "-i") == "+i" ? HilbertSign::kPlusI : HilbertSign::kMinusI;
      return make_hilbert(spec, param_index(d), sign);
    }
    if (kind == "riesz") return make_riesz(spec, param_index(d), d.at("j").get<int>());
    if (kind == "projection") return make_analytic_projection(spec, param_index(d), d.at("sign").get<int>());
    if (kind == "mean") return make_mean_projection(spec, param_index(d));
    if (kind == "cone") return make_cone_projection(spec, cone_from_json(d));
    if (kind == "smooth_cone") return make_smooth_cone(spec, cone_from_json(d));
    if (kind == "random") {
      std::set<std::size_t> ps;
      for (const auto& k : d.value("params", json::array())) ps.insert(k.get<std::size_t>() - 1);
      return make_random_multiplier(spec, d.at("seed").get<std::uint64_t>(), ps);
    }
    if (kind == "tensor") {
      std::vector<Multiplier> ms;
      for (const auto& f : d.at("factors")) ms.push_back(build_multiplier(spec, f));
      return tensor(ms);
    }
    if (kind == "compose") {
      const auto& fs = d.at("factors");
      require(fs.size() == 2, ErrorCode::kParse, "compose takes two factors");
      return compose(build_multiplier(spec, fs[0]), build_multiplier(spec, fs[1]));
    }
    if (kind == "adjoint") return adjoint(build_multiplier(spec, d.at("of")));
    if (kind == "journe_cone") return journe_multiplier(journe_spec_from_json(d), spec);
    throw Error(ErrorCode::kParse, "unknown multiplier kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad multiplier descriptor: ") + e.what());
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\n");
  return s.substr(b, e - b + 1);
}

// Splits on sep at bracket/paren depth 0.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[' || c == '(') ++depth;
    if (c == ']' || c == ')') --depth;
    require(depth >= 0, ErrorCode::kParse, "unbalanced brackets in '" + s + "'");
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  require(depth == 0, ErrorCode::kParse, "unbalanced brackets in '" + s + "'");
  out.push_back(trim(cur));
  return out;
}

json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::exception&) {
    return v;  // bare word, e.g. base=cube
  }
}

}  // namespace

nlohmann::json parse_multiplier_descriptor(const std::string& text_in) {
  const std::string text = trim(text_in);
  require(!text.empty(), ErrorCode::kParse, "empty multiplier expression");
  const auto paren = text.find('(');
  const auto colon = text.find(':');
  if (paren != std::string::npos && (colon == std::string::npos || paren < colon)) {
    const std::string head = trim(text.substr(0, paren));
    require(text.back() == ')', ErrorCode::kParse, "missing ')' in '" + text + "'");
    const std::string inner = text.substr(paren + 1, text.size() - paren - 2);
    json factors = json::array();
    for (const auto& part : split_top(inner, ';')) factors.push_back(parse_multiplier_descriptor(part));
    if (head == "tensor") return {{"kind", "tensor"}, {"factors", factors}};
    if (head == "compose") return {{"kind", "compose"}, {"factors", factors}};
    throw Error(ErrorCode::kParse, "unknown combinator '" + head + "'");
  }
  std::string name = trim(text.substr(0, colon));
  json d;
  if (name == "scone") name = "smooth_cone";
  if (name == "id") name = "identity";
  if (name == "proj") name = "projection";
  if (name == "journe") name = "journe_cone";
  d["kind"] = name;
  if (colon != std::string::npos) {
    for (const auto& kv : split_top(text.substr(colon + 1), ',')) {
      const auto eq = kv.find('=');
      require(eq != std::string::npos, ErrorCode::kParse, "expected key=value, got '" + kv + "'");
      d[trim(kv.substr(0, eq))] = parse_value(trim(kv.substr(eq + 1)));
    }
  }
  if ((name == "cone" || name == "smooth_cone") && d.contains("dir")) {
    auto dir = d["dir"].get<std::vector<double>>();
    double n = 0.0;
    for (double x : dir) n += x * x;
    n = std::sqrt(n);
    require(n > 0.0, ErrorCode::kParse, "cone direction must be nonzero");
    for (auto& x : dir) x /= n;
    d["dir"] = dir;
  }
  return d;
}

}  // namespace commlab
