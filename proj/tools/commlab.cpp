// commlab command line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "commlab/commlab.h"

namespace {

struct Failure {
  int code;
};

void check(cl_status s) {
  if (s != CL_OK) {
    std::cerr << "error: " << cl_last_error() << "\n";
    throw Failure{1};
  }
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  cl_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    throw Failure{1};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    throw Failure{1};
  }
}

struct FieldHandle {
  cl_field* f = nullptr;
  ~FieldHandle() { cl_field_free(f); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"commlab: commutators of multi-parameter singular integrals on the discrete torus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cl_version()));

  // zonal
  auto* zonal = app.add_subcommand("zonal", "zonal harmonics and Journe cone symbols");
  zonal->require_subcommand(1);
  int zn = 3, zd = 3;
  double zsamples = 1e6;
  std::uint64_t zseed = 7;
  auto* vp = zonal->add_subcommand("verify-product", "Monte Carlo check of the zonal product formula");
  vp->add_option("--n", zn, "degree")->check(CLI::NonNegativeNumber);
  vp->add_option("--d", zd, "sphere dimension d (S^{d-1})")->check(CLI::Range(2, 64));
  vp->add_option("--samples", zsamples, "sample count, 1e6 style accepted")->check(CLI::PositiveNumber);
  vp->add_option("--seed", zseed, "seed");

  std::string dirs_path, profile, journe_grid, journe_out;
  int journe_n = 21;
  auto* bj = zonal->add_subcommand("build-journe", "emit a journe_cone multiplier descriptor");
  bj->add_option("--dirs", dirs_path, "JSON file: [[..],..] or {\"dirs\":..,\"k\":..}")->required();
  bj->add_option("--N", journe_n, "truncation degree")->check(CLI::NonNegativeNumber);
  bj->add_option("--profile", profile, "a=0.75,b=0.25[,m=4]");
  bj->add_option("--grid", journe_grid, "also build on this grid and certify the plateau");
  bj->add_option("--out", journe_out, "output file (default stdout)");

  // bmo
  auto* bmo = app.add_subcommand("bmo", "BMO norms of a symbol field");
  std::string bmo_in, bmo_norm = "product", bmo_group, bmo_partition;
  int bmo_budget = 8;
  bmo->add_option("--input", bmo_in, "field file")->required();
  bmo->add_option("--norm", bmo_norm, "product | little | little-product | separate")
      ->check(CLI::IsMember({"product", "little", "little-product", "separate"}));
  bmo->add_option("--group", bmo_group, "grouped parameters for product, e.g. 1,2");
  bmo->add_option("--partition", bmo_partition, "partition for little-product, e.g. (13)(2)");
  bmo->add_option("--budget", bmo_budget, "open-set budget")->check(CLI::PositiveNumber);

  // comm
  auto* comm = app.add_subcommand("comm", "iterated commutators");
  comm->require_subcommand(1);
  auto* cnorm = comm->add_subcommand("norm", "operator norm of an iterated commutator");
  std::string ops, symbol, method = "power";
  double tol = 1e-6;
  int max_iter = 500;
  std::uint64_t cseed = 0;
  cnorm->add_option("--ops", ops, "operators separated by |")->required();
  cnorm->add_option("--symbol", symbol, "symbol field file")->required();
  cnorm->add_option("--method", method, "power | dense")->check(CLI::IsMember({"power", "dense"}));
  cnorm->add_option("--tol", tol, "relative tolerance (power)");
  cnorm->add_option("--max-iter", max_iter, "iteration cap (power)");
  cnorm->add_option("--seed", cseed, "start vector seed");

  // explab
  auto* explab = app.add_subcommand("explab", "seeded experiments and reports");
  explab->require_subcommand(1);
  std::string cfg_path, run_out, report_in, report_format = "csv";
  auto* two = explab->add_subcommand("two-sided", "BMO versus iterated commutator norm");
  two->add_option("--config", cfg_path, "config file")->required();
  two->add_option("--out", run_out, "report JSON path (default: config output key, else stdout)");
  auto* shb = explab->add_subcommand("shift-bound", "commutators with dyadic shifts");
  shb->add_option("--config", cfg_path, "config file")->required();
  shb->add_option("--out", run_out, "report JSON path (default: config output key, else stdout)");
  auto* rep = explab->add_subcommand("report", "render a stored report");
  rep->add_option("--in", report_in, "report JSON")->required();
  rep->add_option("--format", report_format, "csv | md | json")->check(CLI::IsMember({"csv", "md", "json"}));
  rep->add_option("--out", run_out, "output file (default stdout)");

  // field
  auto* field = app.add_subcommand("field", "symbol fields");
  field->require_subcommand(1);
  std::string field_cfg, field_out, field_in;
  std::size_t field_index = 0;
  auto* fgen = field->add_subcommand("gen", "generate a symbol from an explab config");
  fgen->add_option("--config", field_cfg, "config file")->required();
  fgen->add_option("--index", field_index, "sample index");
  fgen->add_option("--out", field_out, "field file")->required();
  auto* finfo = field->add_subcommand("info", "summary of a field");
  finfo->add_option("--input", field_in, "field file")->required();
  auto* fjson = field->add_subcommand("to-json", "dump a field as JSON");
  fjson->add_option("--input", field_in, "field file")->required();
  fjson->add_option("--out", field_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*vp) {
      char* out = nullptr;
      check(cl_zonal_verify_product(zn, zd, static_cast<std::uint64_t>(zsamples), zseed, &out));
      write_out("", take(out));
    } else if (*bj) {
      nlohmann::json req;
      try {
        const auto dirs = nlohmann::json::parse(read_text(dirs_path));
        req = dirs.is_array() ? nlohmann::json{{"dirs", dirs}} : dirs;
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << dirs_path << ": " << e.what() << "\n";
        return 1;
      }
      req["N"] = journe_n;
      if (!profile.empty()) {
        std::stringstream ss(profile);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto eq = item.find('=');
          const std::string key = item.substr(0, eq);
          if (eq == std::string::npos || (key != "a" && key != "b" && key != "m")) {
            std::cerr << "error: profile entries look like a=0.75,b=0.25,m=4\n";
            return 1;
          }
          try {
            req[key] = key == "m" ? nlohmann::json(std::stoi(item.substr(eq + 1)))
                                  : nlohmann::json(std::stod(item.substr(eq + 1)));
          } catch (const std::exception&) {
            std::cerr << "error: bad profile value '" << item << "'\n";
            return 1;
          }
        }
      }
      if (!journe_grid.empty()) req["grid"] = journe_grid;
      char* out = nullptr;
      check(cl_zonal_build_journe(req.dump().c_str(), &out));
      write_out(journe_out, take(out));
    } else if (*bmo) {
      FieldHandle b;
      check(cl_field_load(bmo_in.c_str(), &b.f));
      const std::string sel = bmo_norm == "product" ? bmo_group : bmo_partition;
      char* out = nullptr;
      check(cl_bmo(b.f, bmo_norm.c_str(), sel.c_str(), bmo_budget, &out));
      write_out("", take(out));
    } else if (*cnorm) {
      FieldHandle b;
      check(cl_field_load(symbol.c_str(), &b.f));
      char* out = nullptr;
      check(cl_commutator_norm(b.f, ops.c_str(), method.c_str(), tol, max_iter, cseed, &out));
      write_out("", take(out));
    } else if (*two || *shb) {
      const std::string text = read_text(cfg_path);
      char* out = nullptr;
      int flagged = 0;
      check(cl_explab_run(*two ? "two-sided" : "shift-bound", text.c_str(), &out, &flagged));
      std::string dest = run_out;
      if (dest.empty()) {
        // output key of the config, when present
        std::stringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) {
          const auto hash = line.find('#');
          if (hash != std::string::npos) line.resize(hash);
          const auto eq = line.find('=');
          if (eq == std::string::npos) continue;
          auto key = line.substr(0, eq);
          key.erase(0, key.find_first_not_of(" \t"));
          key.erase(key.find_last_not_of(" \t") + 1);
          if (key != "output") continue;
          dest = line.substr(eq + 1);
          dest.erase(0, dest.find_first_not_of(" \t"));
          dest.erase(dest.find_last_not_of(" \t\r") + 1);
        }
      }
      write_out(dest, take(out));
      if (flagged != 0) {
        std::cerr << "every row was flagged (zero BMO norm)\n";
        return 2;
      }
    } else if (*rep) {
      const std::string text = read_text(report_in);
      char* out = nullptr;
      check(cl_explab_render(text.c_str(), report_format.c_str(), &out));
      write_out(run_out, take(out));
    } else if (*fgen) {
      const std::string text = read_text(field_cfg);
      FieldHandle b;
      check(cl_field_generate(text.c_str(), field_index, &b.f));
      check(cl_field_save(b.f, field_out.c_str()));
    } else if (*finfo) {
      FieldHandle b;
      check(cl_field_load(field_in.c_str(), &b.f));
      char* out = nullptr;
      check(cl_field_info(b.f, &out));
      write_out("", take(out));
    } else if (*fjson) {
      FieldHandle b;
      check(cl_field_load(field_in.c_str(), &b.f));
      char* out = nullptr;
      check(cl_field_to_json(b.f, &out));
      write_out(field_out, take(out));
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
