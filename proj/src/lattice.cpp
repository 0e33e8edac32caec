#include "commlab/lattice.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace commlab {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

GridSpec::GridSpec(std::vector<ParamSpec> params) : params_(std::move(params)) {
  require(!params_.empty(), ErrorCode::kInvalidArgument, "grid needs at least one parameter");
  total_ = 1;
  for (const auto& p : params_) {
    require(p.dim >= 1, ErrorCode::kInvalidArgument, "parameter dimension must be >= 1");
    require(p.points >= 4 && is_pow2(p.points), ErrorCode::kInvalidArgument,
            "points per axis must be a power of two >= 4, got " + std::to_string(p.points));
    std::size_t pp = 1;
    for (int a = 0; a < p.dim; ++a) pp *= static_cast<std::size_t>(p.points);
    param_points_.push_back(pp);
    depth_.push_back(std::countr_zero(static_cast<unsigned>(p.points)));
    first_axis_.push_back(axis_sizes_.size());
    for (int a = 0; a < p.dim; ++a) axis_sizes_.push_back(p.points);
    total_ *= pp;
    cell_volume_ /= static_cast<double>(pp);
  }
  param_stride_.resize(params_.size());
  std::size_t stride = 1;
  for (std::size_t k = params_.size(); k-- > 0;) {
    param_stride_[k] = stride;
    stride *= param_points_[k];
  }
}

GridSpec GridSpec::parse(const std::string& text) {
  std::vector<ParamSpec> params;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    require(x != std::string::npos, ErrorCode::kParse, "grid item '" + item + "' is not DIMxPOINTS");
    try {
      params.push_back({std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "grid item '" + item + "' is not DIMxPOINTS");
    }
  }
  return GridSpec(std::move(params));
}

std::string GridSpec::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(params_[k].dim) + "x" + std::to_string(params_[k].points);
  }
  return out;
}

void GridSpec::split(std::size_t flat, std::span<std::size_t> per_param) const {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    per_param[k] = (flat / param_stride_[k]) % param_points_[k];
  }
}

std::size_t GridSpec::join(std::span<const std::size_t> per_param) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < params_.size(); ++k) flat += per_param[k] * param_stride_[k];
  return flat;
}

Field::Field(GridSpec spec) : spec_(std::move(spec)), samples_(spec_.total_points()) {}

Field::Field(GridSpec spec, std::vector<cplx> samples)
    : spec_(std::move(spec)), samples_(std::move(samples)) {
  require(samples_.size() == spec_.total_points(), ErrorCode::kSpecMismatch,
          "sample count does not match grid point count");
}

bool Field::all_finite() const {
  for (const auto& z : samples_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

Field& Field::operator+=(const Field& o) {
  require(spec_ == o.spec_, ErrorCode::kSpecMismatch, "field grids differ");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += o.samples_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require(spec_ == o.spec_, ErrorCode::kSpecMismatch, "field grids differ");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o.samples_[i];
  return *this;
}

Field& Field::operator*=(cplx s) {
  for (auto& z : samples_) z *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

Field pointwise(const Field& a, const Field& b) {
  require(a.spec() == b.spec(), ErrorCode::kSpecMismatch, "field grids differ");
  Field out(a.spec());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Field conj(Field a) {
  for (auto& z : a.samples()) z = std::conj(z);
  return a;
}

FreqField::FreqField(GridSpec spec, std::vector<cplx> coefficients)
    : spec_(std::move(spec)), coefficients_(std::move(coefficients)) {
  require(coefficients_.size() == spec_.total_points(), ErrorCode::kSpecMismatch,
          "coefficient count does not match grid point count");
}

cplx FreqField::at(std::span<const int> freq) const {
  const auto& sizes = spec_.axis_sizes();
  require(freq.size() == sizes.size(), ErrorCode::kInvalidArgument, "frequency rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    const int n = sizes[a];
    require(freq[a] >= -n / 2 && freq[a] < n / 2, ErrorCode::kInvalidArgument,
            "frequency out of range");
    flat = flat * n + static_cast<std::size_t>((freq[a] + n) % n);
  }
  return coefficients_[flat];
}

namespace {

class PlanCache {
 public:
  fftw_plan get(const std::vector<int>& sizes, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(sizes, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int n : sizes) total *= static_cast<std::size_t>(n);
    // Planned on aligned scratch; run_fft always executes on aligned buffers.
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(sizes.size()), sizes.data(), in, out, sign,
                                   total <= (std::size_t{1} << 18) ? FFTW_MEASURE : FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    require(plan != nullptr, ErrorCode::kUnsupported, "FFTW could not plan transform");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct AlignedBuffer {
  fftw_complex* data = nullptr;
  std::size_t size = 0;
  ~AlignedBuffer() { fftw_free(data); }
  fftw_complex* reserve(std::size_t n) {
    if (n > size) {
      fftw_free(data);
      data = fftw_alloc_complex(n);
      size = n;
    }
    return data;
  }
};

// Returns false on a non-finite input sample.
bool run_fft(const GridSpec& spec, std::span<const cplx> in, std::span<cplx> out, int sign) {
  fftw_plan plan = plan_cache().get(spec.axis_sizes(), sign);
  thread_local AlignedBuffer a, b;
  const std::size_t n = in.size();
  fftw_complex* src = a.reserve(n);
  fftw_complex* dst = b.reserve(n);
  double probe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    src[i][0] = in[i].real();
    src[i][1] = in[i].imag();
    probe += 0.0 * (in[i].real() + in[i].imag());
  }
  if (!std::isfinite(probe)) return false;
  fftw_execute_dft(plan, src, dst);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.total_points()));
  const auto* res = reinterpret_cast<const cplx*>(dst);
  for (std::size_t i = 0; i < n; ++i) out[i] = res[i] * scale;
  return true;
}

}  // namespace

FreqField forward_transform(const GridSpec& spec, std::span<const cplx> samples) {
  require(samples.size() == spec.total_points(), ErrorCode::kSpecMismatch,
          "sample count does not match grid");
  std::vector<cplx> out(samples.size());
  require(run_fft(spec, samples, out, FFTW_FORWARD), ErrorCode::kNonFinite,
          "forward_transform: non-finite sample");
  return FreqField(spec, std::move(out));
}

FreqField forward_transform(const Field& f) { return forward_transform(f.spec(), f.samples()); }

Field inverse_transform(const FreqField& F) {
  std::vector<cplx> out(F.coefficients().size());
  require(run_fft(F.spec(), F.coefficients(), out, FFTW_BACKWARD), ErrorCode::kNonFinite,
          "inverse_transform: non-finite coefficient");
  return Field(F.spec(), std::move(out));
}

cplx inner_product(const Field& f, const Field& g) {
  require(f.spec() == g.spec(), ErrorCode::kSpecMismatch, "inner_product: grids differ");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  return acc * f.spec().cell_volume();
}

double l2_norm(const Field& f) {
  double acc = 0.0;
  for (const auto& z : f.samples()) acc += std::norm(z);
  return std::sqrt(acc * f.spec().cell_volume());
}

double l2_norm(const FreqField& F) {
  double acc = 0.0;
  for (const auto& z : F.coefficients()) acc += std::norm(z);
  return std::sqrt(acc * F.spec().cell_volume());
}

std::vector<int> frequency_table(const GridSpec& spec) {
  const auto& sizes = spec.axis_sizes();
  const std::size_t rank = sizes.size();
  std::vector<int> table(spec.total_points() * rank);
  std::vector<int> idx(rank, 0);
  for (std::size_t flat = 0; flat < spec.total_points(); ++flat) {
    for (std::size_t a = 0; a < rank; ++a) table[flat * rank + a] = axis_frequency(idx[a], sizes[a]);
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < sizes[a]) break;
      idx[a] = 0;
    }
  }
  return table;
}

namespace {

constexpr char kMagic[8] = {'C', 'M', 'L', 'F', 'I', 'E', 'L', 'D'};
constexpr int kFormatVersion = 1;

nlohmann::json header_json(const GridSpec& spec) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : spec.params()) params.push_back({p.dim, p.points});
  return {{"version", kFormatVersion},
          {"params", params},
          {"layout", "row-major"},
          {"dtype", "complex128"}};
}

GridSpec spec_from_header(const nlohmann::json& h) {
  require(h.value("version", 0) == kFormatVersion, ErrorCode::kParse, "unsupported field version");
  require(h.value("layout", "") == "row-major", ErrorCode::kParse, "unsupported field layout");
  require(h.value("dtype", "") == "complex128", ErrorCode::kParse, "unsupported field dtype");
  std::vector<ParamSpec> params;
  for (const auto& p : h.at("params")) params.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  return GridSpec(std::move(params));
}

void put_le64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

double get_le64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated field data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_field(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  const std::string header = header_json(f.spec()).dump();
  os.write(kMagic, 8);
  const auto len = static_cast<std::uint32_t>(header.size());
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((len >> (8 * i)) & 0xff));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& z : f.samples()) {
    put_le64(os, z.real());
    put_le64(os, z.imag());
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed for '" + path + "'");
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    // fall back to the JSON debug format
    is.clear();
    is.seekg(0);
    std::stringstream ss;
    ss << is.rdbuf();
    return field_from_json(ss.str());
  }
  unsigned char lenbuf[4];
  is.read(reinterpret_cast<char*>(lenbuf), 4);
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated field header");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(lenbuf[i]) << (8 * i);
  std::string header(len, '\0');
  is.read(header.data(), len);
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated field header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad field header: ") + e.what());
  }
  GridSpec spec = spec_from_header(h);
  std::vector<cplx> samples(spec.total_points());
  for (auto& z : samples) {
    const double re = get_le64(is);
    const double im = get_le64(is);
    z = {re, im};
  }
  Field f(std::move(spec), std::move(samples));
  require(f.all_finite(), ErrorCode::kNonFinite, "field file contains non-finite values");
  return f;
}

std::string field_to_json(const Field& f) {
  nlohmann::json j = header_json(f.spec());
  std::vector<double> re, im;
  re.reserve(f.size());
  im.reserve(f.size());
  for (const auto& z : f.samples()) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j.dump();
}

Field field_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad field json: ") + e.what());
  }
  GridSpec spec = spec_from_header(j);
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.value("im", std::vector<double>(re.size(), 0.0));
  require(re.size() == spec.total_points() && im.size() == re.size(), ErrorCode::kSpecMismatch,
          "json field sample count does not match grid");
  std::vector<cplx> samples(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) samples[i] = {re[i], im[i]};
  Field f(std::move(spec), std::move(samples));
  require(f.all_finite(), ErrorCode::kNonFinite, "json field contains non-finite values");
  return f;
}

}  // namespace commlab
