#include "commlab/commlab.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "commlab/commutator.hpp"
#include "commlab/dyadic.hpp"
#include "commlab/explab.hpp"
#include "commlab/lattice.hpp"
#include "commlab/multiplier.hpp"
#include "commlab/rng.hpp"
#include "commlab/version.hpp"
#include "commlab/zonal.hpp"

struct cl_field {
  commlab::Field field;
};

namespace {

using nlohmann::json;
using namespace commlab;

thread_local std::string g_last_error;

cl_status fail(cl_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

template <class F>
cl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CL_OK;
  } catch (const Error& e) {
    return fail(static_cast<cl_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return fail(CL_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CL_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  need(out, "out");
  *out = dup_string(s);
}

cl_field* wrap(Field f) { return new cl_field{std::move(f)}; }

std::vector<double> random_unit(Rng& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = standard_normal(rng);
      n2 += x * x;
    }
  } while (n2 < 1e-20);
  for (auto& x : v) x /= std::sqrt(n2);
  return v;
}

json bmo_json(const BmoResult& r) { return r.to_json(); }

}  // namespace

extern "C" {

const char* cl_version(void) { return kVersionString; }
const char* cl_last_error(void) { return g_last_error.c_str(); }
void cl_string_free(char* s) { std::free(s); }

cl_status cl_field_create(const char* grid, cl_field** out) {
  return guarded([&] {
    need(grid, "grid");
    need(out, "out");
    *out = wrap(Field(GridSpec::parse(grid)));
  });
}

cl_status cl_field_load(const char* path, cl_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(load_field(path));
  });
}

cl_status cl_field_from_json(const char* text, cl_field** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = wrap(field_from_json(text));
  });
}

void cl_field_free(cl_field* f) { delete f; }

cl_status cl_field_save(const cl_field* f, const char* path) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    save_field(f->field, path);
  });
}

cl_status cl_field_to_json(const cl_field* f, char** out) {
  return guarded([&] {
    need(f, "field");
    emit(out, field_to_json(f->field));
  });
}

cl_status cl_field_info(const cl_field* f, char** out) {
  return guarded([&] {
    need(f, "field");
    const Field& b = f->field;
    double lo = INFINITY, hi = -INFINITY, mx = 0.0;
    cplx mean = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      lo = std::min(lo, b[i].real());
      hi = std::max(hi, b[i].real());
      mx = std::max(mx, std::abs(b[i]));
      mean += b[i];
    }
    mean /= static_cast<double>(b.size());
    json j{{"grid", b.spec().to_string()},
           {"points", b.size()},
           {"l2", l2_norm(b)},
           {"min_re", lo},
           {"max_re", hi},
           {"max_abs", mx},
           {"mean_re", mean.real()},
           {"mean_im", mean.imag()}};
    emit(out, j.dump(2));
  });
}

size_t cl_field_size(const cl_field* f) { return f == nullptr ? 0 : f->field.size(); }

cl_status cl_field_get(const cl_field* f, double* re_im, size_t count) {
  return guarded([&] {
    need(f, "field");
    need(re_im, "buffer");
    require(count == 2 * f->field.size(), ErrorCode::kSpecMismatch, "buffer must hold 2 * size doubles");
    for (std::size_t i = 0; i < f->field.size(); ++i) {
      re_im[2 * i] = f->field[i].real();
      re_im[2 * i + 1] = f->field[i].imag();
    }
  });
}

cl_status cl_field_set(cl_field* f, const double* re_im, size_t count) {
  return guarded([&] {
    need(f, "field");
    need(re_im, "buffer");
    require(count == 2 * f->field.size(), ErrorCode::kSpecMismatch, "buffer must hold 2 * size doubles");
    for (std::size_t i = 0; i < count; ++i) {
      require(std::isfinite(re_im[i]), ErrorCode::kNonFinite, "non-finite sample");
    }
    for (std::size_t i = 0; i < f->field.size(); ++i) f->field[i] = {re_im[2 * i], re_im[2 * i + 1]};
  });
}

cl_status cl_field_generate(const char* config_text, size_t index, cl_field** out) {
  return guarded([&] {
    need(config_text, "config");
    need(out, "out");
    *out = wrap(gen_symbol(ExperimentConfig::parse(config_text), index));
  });
}

cl_status cl_bmo(const cl_field* f, const char* norm, const char* selector, int budget, char** out) {
  return guarded([&] {
    need(f, "field");
    need(norm, "norm");
    const Field& b = f->field;
    const std::size_t t = b.spec().param_count();
    const std::string sel = selector == nullptr ? "" : selector;
    const std::string kind = norm;
    json j;
    if (kind == "product") {
      std::vector<std::size_t> grouping;
      if (sel.empty()) {
        for (std::size_t k = 0; k < t; ++k) grouping.push_back(k);
      } else {
        std::size_t pos = 0;
        while (pos <= sel.size()) {
          const auto comma = sel.find(',', pos);
          const std::string tok = sel.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
          char* end = nullptr;
          const long k = std::strtol(tok.c_str(), &end, 10);
          require(end != tok.c_str() && *end == '\0' && k >= 1 && static_cast<std::size_t>(k) <= t,
                  ErrorCode::kInvalidArgument, "bad group '" + sel + "'");
          grouping.push_back(static_cast<std::size_t>(k - 1));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
      j = bmo_json(product_bmo_norm(b, grouping, budget));
    } else if (kind == "little-product") {
      const auto part = sel.empty() ? PartitionSpec::trivial(t) : PartitionSpec::parse(sel, t);
      j = bmo_json(little_product_bmo_norm(b, part, budget));
      j["partition"] = part.to_string();
    } else if (kind == "little") {
      const auto r = little_bmo_norm(b);
      j = {{"value", r.value}, {"achieving_set", json::array({r.rectangle.to_json()})}};
    } else if (kind == "separate") {
      j = {{"value", separate_variable_bmo_norm(b)}};
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown norm '" + kind + "'");
    }
    j["norm"] = kind;
    emit(out, j.dump(2));
  });
}

cl_status cl_commutator_norm(const cl_field* f, const char* ops, const char* method, double tol, int max_iter,
                             uint64_t seed, char** out) {
  return guarded([&] {
    need(f, "field");
    need(ops, "ops");
    const Field& b = f->field;
    std::vector<LinearOperator> ts;
    std::string text = ops;
    // '|' separates operators at nesting depth 0.
    std::string cur;
    int depth = 0;
    auto flush = [&] {
      const auto s = cur.find_first_not_of(" \t");
      if (s == std::string::npos) throw Error(ErrorCode::kParse, "empty operator in '" + text + "'");
      const auto e = cur.find_last_not_of(" \t");
      ts.push_back(multiplier_operator(build_multiplier(b.spec(), parse_multiplier_descriptor(cur.substr(s, e - s + 1)))));
      cur.clear();
    };
    for (char c : text) {
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (c == '|' && depth == 0) {
        flush();
      } else {
        cur += c;
      }
    }
    flush();
    const std::string m = method == nullptr ? "power" : method;
    require(m == "power" || m == "dense", ErrorCode::kInvalidArgument, "method must be power or dense");
    std::vector<std::string> warnings;
    const auto c = iterated_commutator(ts, b, &warnings);
    const auto est = operator_norm(c, m == "power" ? NormMethod::kPower : NormMethod::kDense, tol, max_iter, seed);
    json j{{"descriptor", c.descriptor()}, {"estimate", est.to_json()}, {"warnings", warnings}};
    emit(out, j.dump(2));
  });
}

cl_status cl_zonal_verify_product(int n, int d, uint64_t samples, uint64_t seed, char** out) {
  return guarded([&] {
    require(n >= 0 && d >= 2, ErrorCode::kInvalidArgument, "need n >= 0 and d >= 2");
    Rng rng(derive_seed(seed, 0x5a4f));
    const auto xi1 = random_unit(rng, d), xi2 = random_unit(rng, d);
    const auto eta1 = random_unit(rng, d), eta2 = random_unit(rng, d);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return std::clamp(s, -1.0, 1.0);
    };
    const double exact = zonal_eval(n, d, dot(xi1, eta1)) * zonal_eval(n, d, dot(xi2, eta2));
    const auto mc = mc_conditional_expectation(n, d, xi1, xi2, eta1, eta2, samples, seed);
    const double z = mc.standard_error > 0.0 ? std::abs(mc.estimate - exact) / mc.standard_error : 0.0;
    json j{{"n", n},
           {"d", d},
           {"xi1", xi1},
           {"xi2", xi2},
           {"eta1", eta1},
           {"eta2", eta2},
           {"product", exact},
           {"estimate", mc.estimate},
           {"standard_error", mc.standard_error},
           {"samples", mc.samples},
           {"exact_enumeration", mc.exact},
           {"z_score", z},
           {"within_3se", mc.exact ? std::abs(mc.estimate - exact) <= 1e-12 : z <= 3.0}};
    emit(out, j.dump(2));
  });
}

cl_status cl_zonal_build_journe(const char* request_json, char** out) {
  return guarded([&] {
    need(request_json, "request");
    json req = json::parse(request_json);
    const std::string grid = req.value("grid", "");
    req.erase("grid");
    if (!req.contains("k") && req.contains("dirs")) {
      json ks = json::array();
      for (std::size_t i = 0; i < req["dirs"].size(); ++i) ks.push_back(i + 1);
      req["k"] = ks;
    }
    const auto spec = journe_spec_from_json(req);
    const JourneCone cone(spec);
    json j{{"descriptor", journe_spec_to_json(spec)}, {"delta", cone.delta()}};
    if (!grid.empty()) {
      const auto jm = journe_multiplier_certified(spec, GridSpec::parse(grid));
      const auto& c = jm.certificate;
      j["certificate"] = {{"radius", c.radius},
                          {"delta", c.delta},
                          {"plateau_points", c.plateau_points},
                          {"flipped_points", c.flipped_points},
                          {"max_plateau_deviation", c.max_plateau_deviation},
                          {"max_flipped_deviation", c.max_flipped_deviation},
                          {"holds", c.holds()}};
      j["max_abs"] = jm.multiplier.max_abs();
    }
    emit(out, j.dump(2));
  });
}

cl_status cl_explab_run(const char* kind, const char* config_text, char** out, int* flagged_only) {
  return guarded([&] {
    need(kind, "kind");
    need(config_text, "config");
    const auto cfg = ExperimentConfig::parse(config_text);
    const std::string k = kind;
    RatioReport rep;
    if (k == "two-sided") {
      rep = run_two_sided(cfg);
    } else if (k == "shift-bound") {
      rep = run_shift_bound(cfg);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + k + "'");
    }
    if (flagged_only != nullptr) *flagged_only = rep.flagged_only() ? 1 : 0;
    emit(out, rep.to_json().dump(2));
  });
}

cl_status cl_explab_render(const char* report_json, const char* format, char** out) {
  return guarded([&] {
    need(report_json, "report");
    const auto rep = RatioReport::from_json(json::parse(report_json));
    const std::string f = format == nullptr ? "json" : format;
    if (f == "json") {
      emit(out, rep.to_json().dump(2));
    } else if (f == "csv") {
      emit(out, rep.to_csv());
    } else if (f == "md") {
      emit(out, rep.to_markdown());
    } else {
      throw Error(ErrorCode::kInvalidArgument, "format must be json, csv or md");
    }
  });
}

}  // extern "C"
