#include "commlab/explab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "commlab/rng.hpp"
#include "commlab/version.hpp"
#include "commlab/zonal.hpp"

namespace commlab {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// Splits on sep outside brackets and parentheses.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    require(pos == v.size() && std::isfinite(x), ErrorCode::kParse, "");
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "config key '" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  require(x == std::floor(x) && std::abs(x) < 9.0e15, ErrorCode::kParse,
          "config key '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const auto x = std::stoull(v, &pos);
    require(pos == v.size(), ErrorCode::kParse, "");
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "config key '" + key + "' expects an unsigned seed, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::kParse, "config key '" + key + "' expects true/false, got '" + v + "'");
}

std::size_t to_param(const ExperimentConfig& c, const std::string& key, const std::string& v) {
  const long long k = to_int(key, v);
  require(k >= 1 && static_cast<std::size_t>(k) <= c.grid.param_count(), ErrorCode::kInvalidArgument,
          "config key '" + key + "' names parameter " + v + ", not in grid");
  return static_cast<std::size_t>(k - 1);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::vector<std::size_t> all_params(const GridSpec& g) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < g.param_count(); ++k) out.push_back(k);
  return out;
}

json environment_block(const ExperimentConfig& c) {
  return {{"grid", c.grid.to_string()},
          {"symbol_seed", c.symbol.seed},
          {"norm_seed", c.norm_seed},
          {"version", kVersionString},
          {"report_format", kReportVersion}};
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kParse,
            "config line " + std::to_string(lineno) + ": expected key = value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  // grid first: other keys are validated against it.
  bool have_grid = false, have_seed = false;
  std::string partition_text;
  for (const auto& [k, v] : kv) {
    if (k == "grid") {
      c.grid = GridSpec::parse(v);
      have_grid = true;
    }
  }
  require(have_grid, ErrorCode::kParse, "config needs a grid, e.g. grid = 1x16,1x16,1x16");
  for (const auto& [k, v] : kv) {
    if (k == "grid") continue;
    if (k == "partition") {
      partition_text = v;
    } else if (k == "family") {
      c.family.push_back(v);
    } else if (k == "samples") {
      c.samples = static_cast<int>(to_int(k, v));
    } else if (k == "symbol.kind") {
      c.symbol.kind = v;
    } else if (k == "symbol.seed" || k == "seed") {
      c.symbol.seed = to_seed(k, v);
      have_seed = true;
    } else if (k == "symbol.decay") {
      c.symbol.decay = to_double(k, v);
    } else if (k == "symbol.scale") {
      c.symbol.scale = to_double(k, v);
    } else if (k == "symbol.param") {
      c.symbol.param = to_param(c, k, v);
    } else if (k == "symbol.constant") {
      c.symbol.constant = to_bool(k, v);
    } else if (k == "symbol.frozen") {
      c.symbol.frozen.clear();
      for (const auto& p : split(v, ',')) c.symbol.frozen.push_back(to_param(c, k, p));
    } else if (k == "symbol.slice") {
      c.symbol.slice = static_cast<std::size_t>(to_int(k, v));
    } else if (k == "symbol.path") {
      c.symbol.path = v;
    } else if (k == "norm.method") {
      require(v == "power" || v == "dense", ErrorCode::kParse, "norm.method must be power or dense");
      c.method = v == "power" ? NormMethod::kPower : NormMethod::kDense;
    } else if (k == "norm.tol") {
      c.tol = to_double(k, v);
    } else if (k == "norm.max_iter") {
      c.max_iter = static_cast<int>(to_int(k, v));
    } else if (k == "norm.seed") {
      c.norm_seed = to_seed(k, v);
    } else if (k == "budget") {
      c.budget = static_cast<int>(to_int(k, v));
    } else if (k == "journe.N") {
      c.journe_degree = static_cast<int>(to_int(k, v));
    } else if (k == "shift.max_complexity") {
      c.max_complexity = static_cast<int>(to_int(k, v));
    } else if (k == "shift.complexities") {
      for (const auto& tok : split(v, ',')) {
        require(tok.size() == 4, ErrorCode::kParse, "shift complexities look like 0101,2200");
        std::array<int, 4> cx{};
        for (int i = 0; i < 4; ++i) {
          require(std::isdigit(static_cast<unsigned char>(tok[static_cast<std::size_t>(i)])) != 0, ErrorCode::kParse,
                  "shift complexities look like 0101,2200");
          cx[static_cast<std::size_t>(i)] = tok[static_cast<std::size_t>(i)] - '0';
        }
        c.complexities.push_back(cx);
      }
    } else if (k == "output") {
      c.output = v;
    } else {
      throw Error(ErrorCode::kParse, "unknown config key '" + k + "'");
    }
  }
  require(have_seed, ErrorCode::kParse, "config needs symbol.seed");
  require(c.samples >= 1, ErrorCode::kInvalidArgument, "samples must be >= 1");
  require(c.budget >= 1, ErrorCode::kInvalidArgument, "budget must be >= 1");
  require(c.max_complexity >= 0, ErrorCode::kInvalidArgument, "shift.max_complexity must be >= 0");
  const std::set<std::string> kinds{"random-haar", "separable", "frozen-variable", "file"};
  require(kinds.count(c.symbol.kind) > 0, ErrorCode::kInvalidArgument, "unknown symbol kind '" + c.symbol.kind + "'");
  c.partition = partition_text.empty() ? PartitionSpec::trivial(c.grid.param_count())
                                       : PartitionSpec::parse(partition_text, c.grid.param_count());
  if (c.symbol.kind == "frozen-variable" && c.symbol.frozen.empty()) {
    c.symbol.frozen.push_back(c.grid.param_count() - 1);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

nlohmann::json ExperimentConfig::to_json() const {
  json cx = json::array();
  for (const auto& c : complexities) cx.push_back(c);
  json frozen = json::array();
  for (auto k : symbol.frozen) frozen.push_back(k + 1);
  return {{"grid", grid.to_string()},
          {"partition", partition.to_string()},
          {"family", family},
          {"samples", samples},
          {"symbol",
           {{"kind", symbol.kind},
            {"seed", symbol.seed},
            {"decay", symbol.decay},
            {"scale", symbol.scale},
            {"param", symbol.param + 1},
            {"constant", symbol.constant},
            {"frozen", frozen},
            {"slice", symbol.slice},
            {"path", symbol.path}}},
          {"norm",
           {{"method", method == NormMethod::kPower ? "power" : "dense"},
            {"tol", tol},
            {"max_iter", max_iter},
            {"seed", norm_seed}}},
          {"budget", budget},
          {"journe_N", journe_degree},
          {"shift", {{"max_complexity", max_complexity}, {"complexities", cx}}}};
}

Field random_haar_symbol(const GridSpec& grid, const std::vector<std::size_t>& params_in, double decay, double scale,
                         std::uint64_t seed) {
  require(!params_in.empty(), ErrorCode::kInvalidArgument, "random-haar symbol needs parameters");
  std::vector<std::size_t> params = params_in;
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  for (auto k : params) require(k < grid.param_count(), ErrorCode::kInvalidArgument, "parameter not in grid");

  // Coefficients over the listed parameters' Haar indices, row-major.
  std::size_t count = 1;
  for (auto k : params) count *= grid.param_points(k);
  std::vector<cplx> c(count, 0.0);
  Rng rng(derive_seed(seed, 0x5248));
  std::vector<std::size_t> j(params.size(), 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    for (std::size_t m = params.size(); m-- > 0;) {
      j[m] = rest % grid.param_points(params[m]);
      rest /= grid.param_points(params[m]);
    }
    const double re = standard_normal(rng), im = standard_normal(rng);
    double weight = scale;
    bool cancellative = true;
    for (std::size_t m = 0; m < params.size(); ++m) {
      const int d = grid.param(params[m]).dim;
      const auto lab = haar_label(d, j[m]);
      if (lab.level < 0) {
        cancellative = false;
        break;
      }
      // |Q|^{1/2} 2^{-alpha level}
      weight *= std::pow(2.0, -lab.level * d / 2.0) * std::pow(2.0, -decay * lab.level);
    }
    if (cancellative) c[flat] = weight * cplx(re, im);
  }
  std::vector<cplx> coeffs(grid.total_points());
  std::vector<std::size_t> local(grid.param_count());
  for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
    grid.split(flat, local);
    std::size_t idx = 0;
    for (auto k : params) idx = idx * grid.param_points(k) + local[k];
    coeffs[flat] = c[idx];
  }
  // Over the unlisted parameters the tensor is in the space domain and constant.
  return haar_synthesis(HaarTensor(grid, std::set<std::size_t>(params.begin(), params.end()), std::move(coeffs)));
}

Field gen_symbol(const ExperimentConfig& config, std::size_t index) {
  const auto& s = config.symbol;
  const auto& g = config.grid;
  const std::uint64_t seed = derive_seed(s.seed, index);
  if (s.kind == "random-haar") return random_haar_symbol(g, all_params(g), s.decay, s.scale, seed);
  if (s.kind == "separable") {
    require(s.param < g.param_count(), ErrorCode::kInvalidArgument, "separable symbol parameter not in grid");
    if (s.constant) {
      Field b(g);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = s.scale;
      return b;
    }
    return random_haar_symbol(g, {s.param}, s.decay, s.scale, seed);
  }
  if (s.kind == "frozen-variable") {
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < g.param_count(); ++k) {
      if (std::find(s.frozen.begin(), s.frozen.end(), k) == s.frozen.end()) live.push_back(k);
    }
    require(!live.empty(), ErrorCode::kInvalidArgument, "frozen-variable symbol freezes every parameter");
    Field b = random_haar_symbol(g, live, s.decay, s.scale, seed);
    std::vector<std::size_t> local(g.param_count());
    for (std::size_t flat = 0; flat < b.size(); ++flat) {
      g.split(flat, local);
      for (auto k : s.frozen) {
        require(s.slice < g.param_points(k), ErrorCode::kInvalidArgument, "symbol.slice outside the frozen parameter");
        if (local[k] != s.slice) b[flat] = 0.0;
      }
    }
    return b;
  }
  if (s.kind == "file") {
    Field b = load_field(s.path);
    require(b.spec() == g, ErrorCode::kSpecMismatch, "symbol file grid differs from config grid");
    return b;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown symbol kind '" + s.kind + "'");
}

std::vector<std::vector<LinearOperator>> build_family(const ExperimentConfig& config) {
  const auto& g = config.grid;
  const auto& blocks = config.partition.blocks();
  std::vector<std::vector<LinearOperator>> out;
  require(!config.family.empty(), ErrorCode::kInvalidArgument, "config needs at least one family entry");
  for (const auto& entry : config.family) {
    if (entry == "auto:riesz") {
      // Per block: every tensor product of Riesz transforms R_{k,j_k}, k in the block.
      std::vector<std::vector<LinearOperator>> per_block;
      for (const auto& blk : blocks) {
        std::vector<LinearOperator> ops;
        std::vector<int> j(blk.size(), 1);
        while (true) {
          std::vector<Multiplier> fs;
          for (std::size_t m = 0; m < blk.size(); ++m) fs.push_back(make_riesz(g, blk[m], j[m]));
          ops.push_back(multiplier_operator(tensor(fs)));
          std::size_t m = blk.size();
          bool done = true;
          while (m > 0) {
            --m;
            if (++j[m] <= g.param(blk[m]).dim) {
              done = false;
              break;
            }
            j[m] = 1;
          }
          if (done) break;
        }
        per_block.push_back(std::move(ops));
      }
      std::vector<std::size_t> pick(per_block.size(), 0);
      while (true) {
        std::vector<LinearOperator> tuple;
        for (std::size_t s = 0; s < per_block.size(); ++s) tuple.push_back(per_block[s][pick[s]]);
        out.push_back(std::move(tuple));
        std::size_t s = per_block.size();
        bool done = true;
        while (s > 0) {
          --s;
          if (++pick[s] < per_block[s].size()) {
            done = false;
            break;
          }
          pick[s] = 0;
        }
        if (done) break;
      }
      continue;
    }
    if (entry == "auto:journe") {
      std::vector<LinearOperator> tuple;
      for (const auto& blk : blocks) {
        JourneConeSpec js;
        js.params = blk;
        for (auto k : blk) {
          std::vector<double> dir(static_cast<std::size_t>(g.param(k).dim), 0.0);
          dir[0] = 1.0;
          js.directions.push_back(dir);
        }
        js.degree = config.journe_degree;
        tuple.push_back(multiplier_operator(journe_multiplier(js, g)));
      }
      out.push_back(std::move(tuple));
      continue;
    }
    std::vector<LinearOperator> tuple;
    for (const auto& part : split_top(entry, '|')) {
      tuple.push_back(multiplier_operator(build_multiplier(g, parse_multiplier_descriptor(part))));
    }
    out.push_back(std::move(tuple));
  }
  for (const auto& tuple : out) {
    require(tuple.size() == blocks.size(), ErrorCode::kInvalidArgument,
            "operator family and partition incompatible: need one operator per block of " +
                config.partition.to_string());
    for (const auto& op : tuple) {
      if (op.params().empty()) continue;
      bool match = false;
      for (const auto& blk : blocks) {
        match = match || std::set<std::size_t>(blk.begin(), blk.end()) == op.params();
      }
      require(match, ErrorCode::kInvalidArgument,
              "operator family and partition incompatible: an operator does not act on exactly one block");
    }
  }
  return out;
}

RatioSummary summarize(const std::vector<RatioRow>& rows) {
  RatioSummary s;
  s.rows = rows.size();
  std::vector<double> r;
  for (const auto& row : rows) {
    if (!row.flagged) r.push_back(row.ratio);
  }
  s.used = r.size();
  if (r.empty()) return s;
  s.min = *std::min_element(r.begin(), r.end());
  s.max = *std::max_element(r.begin(), r.end());
  s.median = median_of(r);
  s.band = s.min > 0.0 ? s.max / s.min : std::numeric_limits<double>::infinity();
  return s;
}

RatioReport run_two_sided(const ExperimentConfig& config) {
  const auto family = build_family(config);
  RatioReport rep;
  rep.kind = "two-sided";
  rep.config = config.to_json();
  rep.environment = environment_block(config);
  for (int i = 0; i < config.samples; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Field b = gen_symbol(config, idx);
    RatioRow row;
    row.index = idx;
    row.seed = derive_seed(config.symbol.seed, idx);
    row.bmo = little_product_bmo_norm(b, config.partition, config.budget).value;
    std::size_t best = 0;
    bool all_converged = true;
    for (std::size_t t = 0; t < family.size(); ++t) {
      const auto c = iterated_commutator(family[t], b);
      const auto est = operator_norm(c, config.method, config.tol, config.max_iter, derive_seed(config.norm_seed, idx));
      all_converged = all_converged && est.converged;
      if (t == 0 || est.value > row.commutator) {
        row.commutator = est.value;
        best = t;
      }
    }
    row.flagged = row.bmo <= kFlagThreshold;
    row.ratio = row.flagged ? 0.0 : row.commutator / row.bmo;
    row.detail = "tuple=" + std::to_string(best + 1);
    if (!all_converged) row.detail += ";not_converged";
    if (row.flagged) row.detail += ";zero_bmo";
    rep.rows.push_back(row);
  }
  rep.summary = summarize(rep.rows);
  return rep;
}

RatioReport run_shift_bound(const ExperimentConfig& config) {
  const auto& g = config.grid;
  require(g.param_count() == 2, ErrorCode::kInvalidArgument, "shift-bound needs a bi-parameter grid");
  std::vector<std::array<int, 4>> cxs = config.complexities;
  if (cxs.empty()) {
    const int m = config.max_complexity;
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b)
        for (int c = 0; c <= m; ++c)
          for (int d = 0; d <= m; ++d) cxs.push_back({a, b, c, d});
  }
  RatioReport rep;
  rep.kind = "shift-bound";
  rep.config = config.to_json();
  rep.environment = environment_block(config);
  for (int i = 0; i < config.samples; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& cx = cxs[idx % cxs.size()];
    const Field b = gen_symbol(config, idx);
    Rng rng(derive_seed(config.norm_seed, idx));
    std::vector<cplx> fv(g.total_points());
    for (auto& x : fv) {
      const double re = standard_normal(rng);
      x = {re, standard_normal(rng)};
    }
    const Field f(g, std::move(fv));
    ShiftSpec ss;
    ss.i1 = cx[0];
    ss.j1 = cx[1];
    ss.i2 = cx[2];
    ss.j2 = cx[3];
    ss.seed = derive_seed(config.symbol.seed ^ 0x5348494654ULL, idx);
    const DyadicShift s(ss, g);
    const Field bracket = pointwise(b, s.apply(f)) - s.apply(pointwise(b, f));
    RatioRow row;
    row.index = idx;
    row.seed = derive_seed(config.symbol.seed, idx);
    row.bmo = little_bmo_norm(b).value;
    row.commutator = l2_norm(bracket) / l2_norm(f);
    row.weight = (1.0 + std::max(cx[0], cx[1])) * (1.0 + std::max(cx[2], cx[3]));
    row.flagged = row.bmo <= kFlagThreshold;
    row.ratio = row.flagged ? 0.0 : row.commutator / (row.weight * row.bmo);
    row.detail = "complexity=" + std::to_string(cx[0]) + std::to_string(cx[1]) + std::to_string(cx[2]) +
                 std::to_string(cx[3]);
    if (row.flagged) row.detail += ";zero_bmo";
    rep.rows.push_back(row);
  }
  rep.summary = summarize(rep.rows);
  return rep;
}

nlohmann::json RatioReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"index", r.index},
                      {"seed", r.seed},
                      {"bmo", r.bmo},
                      {"commutator", r.commutator},
                      {"weight", r.weight},
                      {"ratio", r.ratio},
                      {"flagged", r.flagged},
                      {"detail", r.detail}});
  }
  return {{"format", kReportVersion},
          {"kind", kind},
          {"config", config},
          {"rows", rows_j},
          {"summary",
           {{"rows", summary.rows},
            {"used", summary.used},
            {"min", summary.min},
            {"max", summary.max},
            {"median", summary.median},
            {"band", summary.band}}},
          {"environment", environment}};
}

RatioReport RatioReport::from_json(const nlohmann::json& j) {
  try {
    require(j.at("format").get<std::string>() == kReportVersion, ErrorCode::kParse, "unsupported report format");
    RatioReport r;
    r.kind = j.at("kind").get<std::string>();
    r.config = j.at("config");
    r.environment = j.at("environment");
    for (const auto& row : j.at("rows")) {
      RatioRow x;
      x.index = row.at("index").get<std::size_t>();
      x.seed = row.at("seed").get<std::uint64_t>();
      x.bmo = row.at("bmo").get<double>();
      x.commutator = row.at("commutator").get<double>();
      x.weight = row.at("weight").get<double>();
      x.ratio = row.at("ratio").get<double>();
      x.flagged = row.at("flagged").get<bool>();
      x.detail = row.at("detail").get<std::string>();
      r.rows.push_back(x);
    }
    r.summary = summarize(r.rows);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad report: ") + e.what());
  }
}

std::string RatioReport::to_csv() const {
  std::ostringstream os;
  os << "# " << kReportVersion << " kind=" << kind << "\n";
  os << "index,seed,bmo,commutator,weight,ratio,flagged,detail\n";
  for (const auto& r : rows) {
    os << r.index << ',' << r.seed << ',' << fmt(r.bmo) << ',' << fmt(r.commutator) << ',' << fmt(r.weight) << ','
       << fmt(r.ratio) << ',' << (r.flagged ? 1 : 0) << ',' << r.detail << "\n";
  }
  return os.str();
}

std::string RatioReport::to_markdown() const {
  std::ostringstream os;
  os << "## " << kind << "\n\n";
  os << "grid `" << environment.value("grid", "") << "`, " << summary.rows << " rows, " << summary.used
     << " used\n\n";
  os << "| min | median | max | band |\n|---|---|---|---|\n";
  os << std::setprecision(6) << "| " << summary.min << " | " << summary.median << " | " << summary.max << " | "
     << summary.band << " |\n\n";
  os << "| # | bmo | commutator | weight | ratio | flag | detail |\n|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.index << " | " << r.bmo << " | " << r.commutator << " | " << r.weight << " | " << r.ratio
       << " | " << (r.flagged ? "x" : "") << " | " << r.detail << " |\n";
  }
  return os.str();
}

}  // namespace commlab
