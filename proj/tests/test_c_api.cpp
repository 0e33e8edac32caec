#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "commlab/commlab.h"

namespace {

std::string take(char* s) {
  std::string out = s;
  cl_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("field handles") {
  cl_field* f = nullptr;
  REQUIRE(cl_field_create("1x8,1x4", &f) == CL_OK);
  CHECK(cl_field_size(f) == 32u);
  std::vector<double> buf(64);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = 0.5 * static_cast<double>(i);
  CHECK(cl_field_set(f, buf.data(), buf.size()) == CL_OK);
  std::vector<double> back(64);
  CHECK(cl_field_get(f, back.data(), back.size()) == CL_OK);
  CHECK(back == buf);
  CHECK(cl_field_get(f, back.data(), 3) == CL_SPEC_MISMATCH);
  buf[5] = NAN;
  CHECK(cl_field_set(f, buf.data(), buf.size()) == CL_NON_FINITE);
  char* js = nullptr;
  REQUIRE(cl_field_to_json(f, &js) == CL_OK);
  cl_field* g = nullptr;
  CHECK(cl_field_from_json(js, &g) == CL_OK);
  cl_string_free(js);
  CHECK(cl_field_save(g, "c_api_test.field") == CL_OK);
  cl_field* h = nullptr;
  CHECK(cl_field_load("c_api_test.field", &h) == CL_OK);
  std::remove("c_api_test.field");
  char* info = nullptr;
  REQUIRE(cl_field_info(h, &info) == CL_OK);
  const auto j = nlohmann::json::parse(take(info));
  CHECK(j["points"] == 32);
  CHECK(j["grid"] == "1x8,1x4");
  cl_field_free(f);
  cl_field_free(g);
  cl_field_free(h);
}

TEST_CASE("error codes and messages") {
  cl_field* f = nullptr;
  CHECK(cl_field_create("1x7", &f) == CL_INVALID_ARGUMENT);
  CHECK(std::string(cl_last_error()).size() > 0);
  CHECK(cl_field_create(nullptr, &f) == CL_INVALID_ARGUMENT);
  CHECK(cl_field_load("no-such-file.field", &f) == CL_IO);
  CHECK(cl_field_from_json("{", &f) == CL_PARSE);
  CHECK(std::string(cl_version()) == "0.1.0");
}

TEST_CASE("bmo and commutator through the C API") {
  const char* cfg = "grid = 1x8,1x8,1x8\nsymbol.seed = 2\n";
  cl_field* b = nullptr;
  REQUIRE(cl_field_generate(cfg, 0, &b) == CL_OK);
  char* out = nullptr;
  REQUIRE(cl_bmo(b, "product", "1,2", 8, &out) == CL_OK);
  auto j = nlohmann::json::parse(take(out));
  CHECK(j["value"].get<double>() > 0.0);
  CHECK(j["budget"] == 8);
  REQUIRE(cl_bmo(b, "little-product", "(13)(2)", 8, &out) == CL_OK);
  j = nlohmann::json::parse(take(out));
  CHECK(j["partition"] == "(13)(2)");
  CHECK(cl_bmo(b, "product", "1,9", 8, &out) == CL_INVALID_ARGUMENT);
  CHECK(cl_bmo(b, "bogus", "", 8, &out) == CL_INVALID_ARGUMENT);
  REQUIRE(cl_commutator_norm(b, "hilbert:k=2 | tensor(hilbert:k=1;hilbert:k=3)", "dense", 1e-6, 100, 3, &out) ==
          CL_OK);
  j = nlohmann::json::parse(take(out));
  CHECK(j["estimate"]["value"].get<double>() > 0.0);
  CHECK(j["descriptor"]["kind"] == "commutator");
  CHECK(cl_commutator_norm(b, "hilbert:k=7", "power", 1e-6, 100, 3, &out) == CL_INVALID_ARGUMENT);
  cl_field_free(b);
}

TEST_CASE("zonal and explab through the C API") {
  char* out = nullptr;
  REQUIRE(cl_zonal_verify_product(3, 3, 100000, 7, &out) == CL_OK);
  auto j = nlohmann::json::parse(take(out));
  CHECK(j["within_3se"] == true);
  REQUIRE(cl_zonal_build_journe(R"({"dirs":[[1,0],[0,1]],"N":11,"grid":"2x8,2x8"})", &out) == CL_OK);
  j = nlohmann::json::parse(take(out));
  CHECK(j["descriptor"]["kind"] == "journe_cone");
  CHECK(j["certificate"]["holds"] == true);
  int flagged = -1;
  const char* cfg = "grid = 1x8,1x8,1x8\npartition = (13)(2)\nfamily = hilbert:k=2 | tensor(hilbert:k=1;hilbert:k=3)\n"
                    "symbol.seed = 1\nsamples = 2\n";
  REQUIRE(cl_explab_run("two-sided", cfg, &out, &flagged) == CL_OK);
  CHECK(flagged == 0);
  const std::string rep = take(out);
  REQUIRE(cl_explab_render(rep.c_str(), "csv", &out) == CL_OK);
  CHECK(take(out).find("index,seed,bmo") != std::string::npos);
  CHECK(cl_explab_render(rep.c_str(), "xml", &out) == CL_INVALID_ARGUMENT);
  CHECK(cl_explab_run("nope", cfg, &out, &flagged) == CL_INVALID_ARGUMENT);
}
