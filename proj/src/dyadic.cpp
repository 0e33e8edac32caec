#include "commlab/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "commlab/rng.hpp"

namespace commlab {

namespace {

using nlohmann::json;

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Number of cubes at levels < level.
std::size_t cube_offset(int dim, int level) {
  const std::size_t q = std::size_t{1} << dim;
  return (ipow(q, level) - 1) / (q - 1);
}

int sign_of(int eps, int beta) { return (std::popcount(static_cast<unsigned>(eps & beta)) & 1) ? -1 : 1; }

// Row-major coordinates of cube `lin` among side^dim cubes.
void cube_coords(std::size_t lin, std::size_t side, int dim, std::size_t* out) {
  for (int a = dim - 1; a >= 0; --a) {
    out[a] = lin % side;
    lin /= side;
  }
}

std::size_t child_lin(const std::size_t* coords, std::size_t side, int dim, int beta) {
  std::size_t lin = 0;
  for (int a = 0; a < dim; ++a) {
    const std::size_t bit = static_cast<std::size_t>((beta >> (dim - 1 - a)) & 1);
    lin = lin * (2 * side) + 2 * coords[a] + bit;
  }
  return lin;
}

struct ParamGeom {
  int dim, points, depth;
  std::size_t local, stride;
};

ParamGeom geom(const GridSpec& g, std::size_t k) {
  return {g.param(k).dim, g.param(k).points, g.depth(k), g.param_points(k), g.param_stride(k)};
}

// One-parameter Haar analysis of v (row-major values on N^d cells).
void haar_forward_1(std::vector<cplx>& v, const ParamGeom& p) {
  const int d = p.dim;
  const int q = 1 << d;
  const double cell = std::pow(static_cast<double>(p.points), -d);
  std::vector<cplx> s(v.size()), out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] * cell;
  std::vector<std::size_t> c(static_cast<std::size_t>(d));
  std::vector<cplx> kids(static_cast<std::size_t>(q));
  for (int level = p.depth - 1; level >= 0; --level) {
    const std::size_t side = std::size_t{1} << level;
    const std::size_t ncubes = ipow(side, d);
    const double scale = std::pow(2.0, level * d / 2.0);  // |Q|^{-1/2}
    const std::size_t base = ipow(2, level * d);
    std::vector<cplx> next(ncubes);
    for (std::size_t lin = 0; lin < ncubes; ++lin) {
      cube_coords(lin, side, d, c.data());
      cplx total = 0.0;
      for (int beta = 0; beta < q; ++beta) {
        kids[static_cast<std::size_t>(beta)] = s[child_lin(c.data(), side, d, beta)];
        total += kids[static_cast<std::size_t>(beta)];
      }
      for (int eps = 1; eps < q; ++eps) {
        cplx acc = 0.0;
        for (int beta = 0; beta < q; ++beta) acc += static_cast<double>(sign_of(eps, beta)) * kids[static_cast<std::size_t>(beta)];
        out[base + lin * static_cast<std::size_t>(q - 1) + static_cast<std::size_t>(eps - 1)] = acc * scale;
      }
      next[lin] = total;
    }
    s.swap(next);
  }
  out[0] = s[0];
  v.swap(out);
}

void haar_inverse_1(std::vector<cplx>& v, const ParamGeom& p) {
  const int d = p.dim;
  const int q = 1 << d;
  const double cell = std::pow(static_cast<double>(p.points), -d);
  std::vector<cplx> s{v[0]};
  std::vector<std::size_t> c(static_cast<std::size_t>(d));
  std::vector<cplx> vals(static_cast<std::size_t>(q));
  for (int level = 0; level < p.depth; ++level) {
    const std::size_t side = std::size_t{1} << level;
    const std::size_t ncubes = ipow(side, d);
    const double scale = std::pow(2.0, -level * d / 2.0);  // |Q|^{1/2}
    const std::size_t base = ipow(2, level * d);
    std::vector<cplx> next(ncubes * static_cast<std::size_t>(q));
    for (std::size_t lin = 0; lin < ncubes; ++lin) {
      cube_coords(lin, side, d, c.data());
      vals[0] = s[lin];
      for (int eps = 1; eps < q; ++eps) {
        vals[static_cast<std::size_t>(eps)] =
            v[base + lin * static_cast<std::size_t>(q - 1) + static_cast<std::size_t>(eps - 1)] * scale;
      }
      for (int beta = 0; beta < q; ++beta) {
        cplx acc = 0.0;
        for (int eps = 0; eps < q; ++eps) acc += static_cast<double>(sign_of(eps, beta)) * vals[static_cast<std::size_t>(eps)];
        next[child_lin(c.data(), side, d, beta)] = acc / static_cast<double>(q);
      }
    }
    s.swap(next);
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s[i] / cell;
}

// Applies fn to every fiber of parameter k (values of its local index with all
// other parameters fixed).
template <class Fn>
void for_each_fiber(std::vector<cplx>& data, const GridSpec& g, std::size_t k, Fn&& fn) {
  const ParamGeom p = geom(g, k);
  const std::size_t outer = g.total_points() / (p.local * p.stride);
  std::vector<cplx> fiber(p.local);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < p.stride; ++r) {
      const std::size_t base = o * p.local * p.stride + r;
      for (std::size_t i = 0; i < p.local; ++i) fiber[i] = data[base + i * p.stride];
      fn(fiber, p);
      for (std::size_t i = 0; i < p.local; ++i) data[base + i * p.stride] = fiber[i];
    }
  }
}

void check_dyadic(const GridSpec& g) {
  for (std::size_t k = 0; k < g.param_count(); ++k) {
    const int n = g.param(k).points;
    require(n >= 2 && (n & (n - 1)) == 0, ErrorCode::kInvalidArgument, "Haar analysis needs a dyadic grid");
  }
}

std::vector<std::size_t> normalized_params(const GridSpec& g, std::vector<std::size_t> ps) {
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  for (auto k : ps) {
    require(k < g.param_count(), ErrorCode::kInvalidArgument,
            "parameter index " + std::to_string(k + 1) + " not in grid");
  }
  return ps;
}

// Cube (level, lin) for cube id in level-major order.
DyadicCube cube_from_id(int dim, std::size_t id) {
  DyadicCube c;
  while (cube_offset(dim, c.level + 1) <= id) ++c.level;
  c.index = id - cube_offset(dim, c.level);
  return c;
}

// Axis interval [lo, hi) of cube c along axis a of a parameter with n points.
void cube_box(const DyadicCube& c, int dim, int n, std::size_t* lo, std::size_t* hi) {
  const std::size_t side = std::size_t{1} << c.level;
  const std::size_t len = static_cast<std::size_t>(n) / side;
  std::vector<std::size_t> co(static_cast<std::size_t>(dim));
  cube_coords(c.index, side, dim, co.data());
  for (int a = 0; a < dim; ++a) {
    lo[a] = co[static_cast<std::size_t>(a)] * len;
    hi[a] = lo[a] + len;
  }
}

// Iterates over the flat indices of the box [lo, hi) of an axis grid.
template <class Fn>
void for_each_in_box(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi,
                     const std::vector<std::size_t>& sizes, Fn&& fn) {
  const std::size_t rank = sizes.size();
  std::vector<std::size_t> idx(lo);
  std::vector<std::size_t> stride(rank, 1);
  for (std::size_t a = rank; a-- > 1;) stride[a - 1] = stride[a] * sizes[a];
  while (true) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < rank; ++a) flat += idx[a] * stride[a];
    fn(flat);
    std::size_t a = rank;
    while (a > 0) {
      --a;
      if (++idx[a] < hi[a]) break;
      idx[a] = lo[a];
      if (a == 0) return;
    }
    if (rank == 0) return;
  }
}

// Carleson search over one slice -------------------------------------------

struct CarlesonSearch {
  std::vector<ParamGeom> params;
  std::vector<std::size_t> cube_counts;  // per grouped parameter
  std::vector<std::size_t> rect_stride;
  std::size_t rect_count = 1;
  std::vector<std::size_t> cell_sizes;  // per grouped axis
  std::size_t cell_count = 1;
  double cell_volume = 1.0;

  explicit CarlesonSearch(std::vector<ParamGeom> ps) : params(std::move(ps)) {
    for (const auto& p : params) {
      cube_counts.push_back(cube_offset(p.dim, p.depth));
      for (int a = 0; a < p.dim; ++a) cell_sizes.push_back(static_cast<std::size_t>(p.points));
      cell_count *= p.local;
      cell_volume *= std::pow(static_cast<double>(p.points), -p.dim);
    }
    rect_stride.assign(params.size(), 1);
    for (std::size_t m = params.size(); m-- > 0;) {
      rect_stride[m] = rect_count;
      rect_count *= cube_counts[m];
    }
  }

  std::vector<DyadicCube> rect_cubes(std::size_t r) const {
    std::vector<DyadicCube> out(params.size());
    for (std::size_t m = 0; m < params.size(); ++m) {
      out[m] = cube_from_id(params[m].dim, (r / rect_stride[m]) % cube_counts[m]);
    }
    return out;
  }

  double rect_measure(std::size_t r) const {
    double mu = 1.0;
    const auto cs = rect_cubes(r);
    for (std::size_t m = 0; m < params.size(); ++m) mu *= std::pow(2.0, -cs[m].level * params[m].dim);
    return mu;
  }

  void rect_box(std::size_t r, std::vector<std::size_t>& lo, std::vector<std::size_t>& hi) const {
    lo.resize(cell_sizes.size());
    hi.resize(cell_sizes.size());
    const auto cs = rect_cubes(r);
    std::size_t a = 0;
    for (std::size_t m = 0; m < params.size(); ++m) {
      cube_box(cs[m], params[m].dim, params[m].points, lo.data() + a, hi.data() + a);
      a += static_cast<std::size_t>(params[m].dim);
    }
  }

  // E(R) = sum of e over sub-rectangles, separably per parameter.
  std::vector<double> subtree_sums(std::vector<double> e) const {
    for (std::size_t m = 0; m < params.size(); ++m) {
      const auto& p = params[m];
      const std::size_t inner = rect_stride[m];
      const std::size_t outer = rect_count / (cube_counts[m] * inner);
      const int q = 1 << p.dim;
      std::vector<std::size_t> c(static_cast<std::size_t>(p.dim));
      for (int level = p.depth - 2; level >= 0; --level) {
        const std::size_t side = std::size_t{1} << level;
        const std::size_t n = ipow(side, p.dim);
        const std::size_t off = cube_offset(p.dim, level), child_off = cube_offset(p.dim, level + 1);
        for (std::size_t lin = 0; lin < n; ++lin) {
          cube_coords(lin, side, p.dim, c.data());
          for (int beta = 0; beta < q; ++beta) {
            const std::size_t child = child_off + child_lin(c.data(), side, p.dim, beta);
            for (std::size_t o = 0; o < outer; ++o) {
              const std::size_t base = o * cube_counts[m] * inner;
              for (std::size_t r = 0; r < inner; ++r) e[base + (off + lin) * inner + r] += e[base + child * inner + r];
            }
          }
        }
      }
    }
    return e;
  }

  struct Outcome {
    double value = 0.0;
    std::vector<std::size_t> rects;
  };

  Outcome run(const std::vector<double>& e, int budget) const {
    const auto total = subtree_sums(e);
    Outcome best;
    std::vector<std::pair<double, std::size_t>> singles(rect_count);
    for (std::size_t r = 0; r < rect_count; ++r) {
      const double v = std::sqrt(total[r] / rect_measure(r));
      singles[r] = {v, r};
      if (v > best.value) best = {v, {r}};
    }
    if (best.rects.empty()) best.rects.push_back(0);
    if (budget <= 1 || best.value == 0.0) return best;

    std::stable_sort(singles.begin(), singles.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    constexpr std::size_t kCandidates = 32;
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < std::min(kCandidates, singles.size()); ++i) cand.push_back(singles[i].second);

    // Rectangles carrying energy, with their boxes.
    struct Box {
      std::vector<std::size_t> lo, hi;
      double e, cells;
    };
    std::vector<Box> boxes;
    for (std::size_t r = 0; r < rect_count; ++r) {
      if (e[r] <= 0.0) continue;
      Box b;
      rect_box(r, b.lo, b.hi);
      b.e = e[r];
      b.cells = 1.0;
      for (std::size_t a = 0; a < b.lo.size(); ++a) b.cells *= static_cast<double>(b.hi[a] - b.lo[a]);
      boxes.push_back(std::move(b));
    }

    const std::size_t rank = cell_sizes.size();
    std::vector<std::size_t> isizes(rank);
    for (std::size_t a = 0; a < rank; ++a) isizes[a] = cell_sizes[a] + 1;
    std::vector<std::size_t> istride(rank, 1);
    for (std::size_t a = rank; a-- > 1;) istride[a - 1] = istride[a] * isizes[a];
    std::size_t icount = 1;
    for (auto s : isizes) icount *= s;

    auto box_sum = [&](const std::vector<double>& integral, const std::vector<std::size_t>& lo,
                       const std::vector<std::size_t>& hi) {
      double s = 0.0;
      for (std::size_t corner = 0; corner < (std::size_t{1} << rank); ++corner) {
        std::size_t flat = 0;
        int sign = 1;
        for (std::size_t a = 0; a < rank; ++a) {
          if ((corner >> a) & 1) {
            flat += lo[a] * istride[a];
            sign = -sign;
          } else {
            flat += hi[a] * istride[a];
          }
        }
        s += sign * integral[flat];
      }
      return s;
    };

    auto union_value = [&](const std::vector<char>& mask) {
      std::vector<double> integral(icount, 0.0);
      std::vector<std::size_t> idx(rank);
      double count = 0.0;
      for (std::size_t cell = 0; cell < cell_count; ++cell) {
        if (!mask[cell]) continue;
        count += 1.0;
        std::size_t rest = cell, flat = 0;
        for (std::size_t a = rank; a-- > 0;) {
          idx[a] = rest % cell_sizes[a];
          rest /= cell_sizes[a];
        }
        for (std::size_t a = 0; a < rank; ++a) flat += (idx[a] + 1) * istride[a];
        integral[flat] = 1.0;
      }
      for (std::size_t a = 0; a < rank; ++a) {
        for (std::size_t flat = 0; flat < icount; ++flat) {
          if ((flat / istride[a]) % isizes[a] == 0) continue;
          integral[flat] += integral[flat - istride[a]];
        }
      }
      double energy = 0.0;
      for (const auto& b : boxes) {
        if (box_sum(integral, b.lo, b.hi) >= b.cells - 0.5) energy += b.e;
      }
      return count > 0.0 ? std::sqrt(energy / (count * cell_volume)) : 0.0;
    };

    auto add_rect = [&](std::vector<char>& mask, std::size_t r) {
      std::vector<std::size_t> lo, hi;
      rect_box(r, lo, hi);
      for_each_in_box(lo, hi, cell_sizes, [&](std::size_t flat) { mask[flat] = 1; });
    };
    auto contained = [&](const std::vector<char>& mask, std::size_t r) {
      std::vector<std::size_t> lo, hi;
      rect_box(r, lo, hi);
      bool all = true;
      for_each_in_box(lo, hi, cell_sizes, [&](std::size_t flat) { all = all && mask[flat]; });
      return all;
    };

    std::vector<char> mask(cell_count, 0);
    std::vector<std::size_t> chain{cand[0]};
    add_rect(mask, cand[0]);
    for (int step = 1; step < budget; ++step) {
      double step_best = -1.0;
      std::size_t pick = kNone;
      for (std::size_t r : cand) {
        if (contained(mask, r)) continue;
        auto trial = mask;
        add_rect(trial, r);
        const double v = union_value(trial);
        if (v > step_best) {
          step_best = v;
          pick = r;
        }
      }
      if (pick == kNone) break;
      add_rect(mask, pick);
      chain.push_back(pick);
      if (step_best > best.value) best = {step_best, chain};
    }
    return best;
  }
};

}  // namespace

HaarLabel haar_label(int dim, std::size_t j) {
  HaarLabel l;
  if (j == 0) return l;
  const std::size_t q = std::size_t{1} << dim;
  l.level = 0;
  while (ipow(q, l.level + 1) <= j) ++l.level;
  const std::size_t rel = j - ipow(q, l.level);
  l.cube = rel / (q - 1);
  l.signature = static_cast<int>(rel % (q - 1)) + 1;
  return l;
}

std::size_t haar_index(int dim, const HaarLabel& label) {
  if (label.level < 0) return 0;
  const std::size_t q = std::size_t{1} << dim;
  require(label.signature >= 1 && static_cast<std::size_t>(label.signature) < q, ErrorCode::kInvalidArgument,
          "Haar signature out of range");
  require(label.cube < ipow(std::size_t{1} << label.level, dim), ErrorCode::kInvalidArgument,
          "Haar cube index out of range");
  return ipow(q, label.level) + label.cube * (q - 1) + static_cast<std::size_t>(label.signature - 1);
}

HaarTensor::HaarTensor(GridSpec spec, std::set<std::size_t> params, std::vector<cplx> coefficients)
    : spec_(std::move(spec)), params_(std::move(params)), coefficients_(std::move(coefficients)) {
  require(coefficients_.size() == spec_.total_points(), ErrorCode::kSpecMismatch,
          "Haar tensor size does not match grid");
}

HaarTensor haar_analysis(const Field& b) {
  std::set<std::size_t> all;
  for (std::size_t k = 0; k < b.spec().param_count(); ++k) all.insert(k);
  return haar_analysis(b, all);
}

HaarTensor haar_analysis(const Field& b, const std::set<std::size_t>& params) {
  check_dyadic(b.spec());
  require(b.all_finite(), ErrorCode::kNonFinite, "Haar analysis of a non-finite field");
  std::vector<cplx> data(b.samples().begin(), b.samples().end());
  for (auto k : params) {
    require(k < b.spec().param_count(), ErrorCode::kInvalidArgument, "parameter not in grid");
    for_each_fiber(data, b.spec(), k, haar_forward_1);
  }
  return HaarTensor(b.spec(), params, std::move(data));
}

Field haar_synthesis(const HaarTensor& t) {
  std::vector<cplx> data(t.coefficients().begin(), t.coefficients().end());
  for (auto k : t.params()) for_each_fiber(data, t.spec(), k, haar_inverse_1);
  return Field(t.spec(), std::move(data));
}

double DyadicRectangle::measure(const GridSpec& spec) const {
  double mu = 1.0;
  for (std::size_t m = 0; m < params.size(); ++m) mu *= std::pow(2.0, -cubes[m].level * spec.param(params[m]).dim);
  return mu;
}

nlohmann::json DyadicRectangle::to_json() const {
  json out = json::array();
  for (std::size_t m = 0; m < params.size(); ++m) {
    out.push_back({{"k", params[m] + 1}, {"level", cubes[m].level}, {"cube", cubes[m].index}});
  }
  return out;
}

nlohmann::json BmoResult::to_json() const {
  json set = json::array();
  for (const auto& r : achieving_set) set.push_back(r.to_json());
  json frozen = json::object();
  for (std::size_t k = 0; k < frozen_point.size(); ++k) {
    if (frozen_point[k] != kNone) frozen[std::to_string(k + 1)] = frozen_point[k];
  }
  json ch = json::array();
  for (auto k : choice) ch.push_back(k + 1);
  return {{"value", value}, {"achieving_set", set}, {"frozen_point", frozen}, {"achieving_choice", ch},
          {"budget", budget}};
}

BmoResult product_bmo_norm(const Field& b, const std::vector<std::size_t>& grouping_in, int budget) {
  const GridSpec& g = b.spec();
  require(!grouping_in.empty(), ErrorCode::kInvalidArgument, "product BMO needs a nonempty grouping");
  require(budget >= 1, ErrorCode::kInvalidArgument, "open set budget must be >= 1");
  const auto grouping = normalized_params(g, grouping_in);
  const std::set<std::size_t> gset(grouping.begin(), grouping.end());
  const HaarTensor t = haar_analysis(b, gset);

  std::vector<ParamGeom> gp;
  for (auto k : grouping) gp.push_back(geom(g, k));
  const CarlesonSearch search(gp);

  // Per grouped parameter: cube id of each Haar index (kNone for the average).
  std::vector<std::vector<std::size_t>> cube_of(grouping.size());
  for (std::size_t m = 0; m < grouping.size(); ++m) {
    cube_of[m].assign(gp[m].local, kNone);
    for (std::size_t j = 1; j < gp[m].local; ++j) {
      const auto l = haar_label(gp[m].dim, j);
      cube_of[m][j] = cube_offset(gp[m].dim, l.level) + l.cube;
    }
  }

  std::vector<std::size_t> frozen;
  for (std::size_t k = 0; k < g.param_count(); ++k) {
    if (!gset.count(k)) frozen.push_back(k);
  }
  std::size_t slices = 1;
  for (auto k : frozen) slices *= g.param_points(k);

  BmoResult res;
  res.budget = budget;
  res.choice = grouping;
  res.frozen_point.assign(g.param_count(), kNone);
  bool have = false;
  std::vector<std::size_t> local(grouping.size());
  std::vector<double> e(search.rect_count);
  for (std::size_t s = 0; s < slices; ++s) {
    std::size_t base = 0, rest = s;
    std::vector<std::size_t> fpt(g.param_count(), kNone);
    for (std::size_t f = frozen.size(); f-- > 0;) {
      const std::size_t k = frozen[f];
      fpt[k] = rest % g.param_points(k);
      rest /= g.param_points(k);
      base += fpt[k] * g.param_stride(k);
    }
    std::fill(e.begin(), e.end(), 0.0);
    std::fill(local.begin(), local.end(), 1);  // j = 0 skipped
    while (true) {
      std::size_t flat = base, rect = 0;
      for (std::size_t m = 0; m < grouping.size(); ++m) {
        flat += local[m] * gp[m].stride;
        rect += cube_of[m][local[m]] * search.rect_stride[m];
      }
      e[rect] += std::norm(t[flat]);
      std::size_t m = grouping.size();
      bool done = true;
      while (m > 0) {
        --m;
        if (++local[m] < gp[m].local) {
          done = false;
          break;
        }
        local[m] = 1;
      }
      if (done) break;
    }
    const auto out = search.run(e, budget);
    if (!have || out.value > res.value) {
      have = true;
      res.value = out.value;
      res.achieving_set.clear();
      for (auto r : out.rects) res.achieving_set.push_back({grouping, search.rect_cubes(r)});
      res.frozen_point = fpt;
    }
  }
  return res;
}

LittleBmoResult little_bmo_norm(const Field& b) {
  const GridSpec& g = b.spec();
  check_dyadic(g);
  const std::size_t t = g.param_count();
  std::vector<std::size_t> sizes(g.axis_sizes().begin(), g.axis_sizes().end());
  std::vector<std::size_t> counts(t);
  std::size_t rects = 1;
  for (std::size_t k = 0; k < t; ++k) {
    counts[k] = cube_offset(g.param(k).dim, g.depth(k));
    rects *= counts[k];
  }
  LittleBmoResult res;
  std::vector<std::size_t> lo(g.axis_count()), hi(g.axis_count());
  std::vector<DyadicCube> cubes(t);
  const auto samples = b.samples();
  for (std::size_t r = 0; r < rects; ++r) {
    std::size_t rest = r;
    for (std::size_t k = t; k-- > 0;) {
      cubes[k] = cube_from_id(g.param(k).dim, rest % counts[k]);
      rest /= counts[k];
      cube_box(cubes[k], g.param(k).dim, g.param(k).points, lo.data() + g.first_axis(k), hi.data() + g.first_axis(k));
    }
    cplx sum = 0.0;
    double n = 0.0;
    for_each_in_box(lo, hi, sizes, [&](std::size_t f) {
      sum += samples[f];
      n += 1.0;
    });
    const cplx mean = sum / n;
    double osc = 0.0;
    for_each_in_box(lo, hi, sizes, [&](std::size_t f) { osc += std::abs(samples[f] - mean); });
    osc /= n;
    if (osc > res.value) {
      res.value = osc;
      std::vector<std::size_t> ps(t);
      for (std::size_t k = 0; k < t; ++k) ps[k] = k;
      res.rectangle = {ps, cubes};
    }
  }
  return res;
}

double separate_variable_bmo_norm(const Field& b) {
  const GridSpec& g = b.spec();
  check_dyadic(g);
  std::vector<cplx> data(b.samples().begin(), b.samples().end());
  double best = 0.0;
  for (std::size_t k = 0; k < g.param_count(); ++k) {
    for_each_fiber(data, g, k, [&](std::vector<cplx>& v, const ParamGeom& p) {
      std::vector<std::size_t> lo(static_cast<std::size_t>(p.dim)), hi(lo.size());
      const std::vector<std::size_t> sizes(lo.size(), static_cast<std::size_t>(p.points));
      for (std::size_t id = 0; id < cube_offset(p.dim, p.depth); ++id) {
        cube_box(cube_from_id(p.dim, id), p.dim, p.points, lo.data(), hi.data());
        cplx sum = 0.0;
        double n = 0.0;
        for_each_in_box(lo, hi, sizes, [&](std::size_t f) {
          sum += v[f];
          n += 1.0;
        });
        const cplx mean = sum / n;
        double sq = 0.0;
        for_each_in_box(lo, hi, sizes, [&](std::size_t f) { sq += std::norm(v[f] - mean); });
        best = std::max(best, std::sqrt(sq / n));
      }
    });
  }
  return best;
}

PartitionSpec::PartitionSpec(std::vector<std::vector<std::size_t>> blocks, std::size_t t)
    : blocks_(std::move(blocks)), t_(t) {
  require(t_ >= 1 && !blocks_.empty(), ErrorCode::kInvalidArgument, "partition needs at least one block");
  std::vector<int> seen(t_, 0);
  for (auto& blk : blocks_) {
    require(!blk.empty(), ErrorCode::kInvalidArgument, "partition blocks must be nonempty");
    std::sort(blk.begin(), blk.end());
    for (auto k : blk) {
      require(k < t_, ErrorCode::kInvalidArgument, "partition index " + std::to_string(k + 1) + " out of range");
      require(seen[k]++ == 0, ErrorCode::kInvalidArgument, "partition blocks overlap");
    }
  }
  for (std::size_t k = 0; k < t_; ++k) {
    require(seen[k] == 1, ErrorCode::kInvalidArgument, "partition misses parameter " + std::to_string(k + 1));
  }
}

PartitionSpec PartitionSpec::parse(const std::string& text, std::size_t t) {
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    require(text[i] == '(', ErrorCode::kParse, "partition must look like (13)(2)");
    const auto close = text.find(')', i);
    require(close != std::string::npos, ErrorCode::kParse, "unbalanced partition '" + text + "'");
    const std::string inner = text.substr(i + 1, close - i - 1);
    std::vector<std::size_t> blk;
    const bool commas = inner.find(',') != std::string::npos;
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      const int v = std::stoi(tok);
      require(v >= 1, ErrorCode::kParse, "partition indices are 1-based");
      blk.push_back(static_cast<std::size_t>(v - 1));
      tok.clear();
    };
    for (char c : inner) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        tok += c;
        if (!commas) flush();
      } else if (c == ',') {
        flush();
      } else {
        require(std::isspace(static_cast<unsigned char>(c)) != 0, ErrorCode::kParse,
                "unexpected character in partition '" + text + "'");
      }
    }
    flush();
    blocks.push_back(blk);
    i = close + 1;
  }
  return PartitionSpec(std::move(blocks), t);
}

PartitionSpec PartitionSpec::trivial(std::size_t t) {
  std::vector<std::vector<std::size_t>> b;
  for (std::size_t k = 0; k < t; ++k) b.push_back({k});
  return PartitionSpec(b, t);
}

PartitionSpec PartitionSpec::full(std::size_t t) {
  std::vector<std::size_t> all;
  for (std::size_t k = 0; k < t; ++k) all.push_back(k);
  return PartitionSpec({all}, t);
}

std::string PartitionSpec::to_string() const {
  const bool wide = t_ > 9;
  std::string s;
  for (const auto& blk : blocks_) {
    s += '(';
    for (std::size_t i = 0; i < blk.size(); ++i) {
      if (wide && i > 0) s += ',';
      s += std::to_string(blk[i] + 1);
    }
    s += ')';
  }
  return s;
}

BmoResult little_product_bmo_norm(const Field& b, const PartitionSpec& part, int budget) {
  require(part.param_count() == b.spec().param_count(), ErrorCode::kSpecMismatch,
          "partition does not cover the grid parameters");
  const auto& blocks = part.blocks();
  std::vector<std::size_t> pick(blocks.size(), 0);
  BmoResult best;
  bool have = false;
  while (true) {
    std::vector<std::size_t> grouping;
    for (std::size_t s = 0; s < blocks.size(); ++s) grouping.push_back(blocks[s][pick[s]]);
    auto r = product_bmo_norm(b, grouping, budget);
    if (!have || r.value > best.value) {
      have = true;
      best = std::move(r);
    }
    std::size_t s = blocks.size();
    bool done = true;
    while (s > 0) {
      --s;
      if (++pick[s] < blocks[s].size()) {
        done = false;
        break;
      }
      pick[s] = 0;
    }
    if (done) break;
  }
  return best;
}

// Shifts -----------------------------------------------------------------------

nlohmann::json ShiftSpec::to_json() const {
  const char* mode = coefficients == ShiftCoefficients::kRandomPhase ? "random_phase"
                     : coefficients == ShiftCoefficients::kCanonical ? "canonical"
                                                                      : "custom";
  return {{"complexity", {i1, j1, i2, j2}}, {"coefficients", mode}, {"seed", seed}};
}

double shift_coefficient_bound(const GridSpec& grid, const ShiftTerm& term) {
  double bound = 1.0;
  for (std::size_t p = 0; p < 2; ++p) {
    const int d = grid.param(p).dim;
    const auto li = haar_label(d, term.i[p]), lj = haar_label(d, term.j[p]);
    const int lk = term.k[p].level;
    // sqrt(|I||J|)/|K| with |Q| = 2^{-level d}
    bound *= std::pow(2.0, -(li.level + lj.level - 2 * lk) * d / 2.0);
  }
  return bound;
}

DyadicShift::DyadicShift(const ShiftSpec& spec, const GridSpec& grid) : spec_(spec), grid_(grid) {
  require(grid.param_count() == 2, ErrorCode::kInvalidArgument, "dyadic shifts need a bi-parameter grid");
  check_dyadic(grid);
  const int cx[2][2] = {{spec.i1, spec.j1}, {spec.i2, spec.j2}};
  for (std::size_t p = 0; p < 2; ++p) {
    const int d = grid.param(p).dim, depth = grid.depth(p);
    const int ci = cx[p][0], cj = cx[p][1];
    require(ci >= 0 && cj >= 0, ErrorCode::kInvalidArgument, "shift complexity must be >= 0");
    require(std::max(ci, cj) < depth, ErrorCode::kInvalidArgument, "shift complexity exceeds grid depth");
    const int q = 1 << d;
    std::vector<std::size_t> kc(static_cast<std::size_t>(d)), co(static_cast<std::size_t>(d));
    for (int lk = 0; lk + std::max(ci, cj) < depth; ++lk) {
      const std::size_t side = std::size_t{1} << lk;
      for (std::size_t klin = 0; klin < ipow(side, d); ++klin) {
        cube_coords(klin, side, d, kc.data());
        // Descendants of K at relative depth r, as cube indices at level lk + r.
        auto descendants = [&](int r) {
          std::vector<std::size_t> out;
          const std::size_t span = std::size_t{1} << r, dside = side << r;
          for (std::size_t off = 0; off < ipow(span, d); ++off) {
            cube_coords(off, span, d, co.data());
            std::size_t lin = 0;
            for (int a = 0; a < d; ++a) lin = lin * dside + kc[static_cast<std::size_t>(a)] * span + co[static_cast<std::size_t>(a)];
            out.push_back(lin);
          }
          return out;
        };
        const auto is = descendants(ci), js = descendants(cj);
        for (int eps = 1; eps < q; ++eps) {
          for (auto i : is) {
            for (auto j : js) {
              terms_[p].push_back({{lk, klin}, haar_index(d, {lk + ci, i, eps}), haar_index(d, {lk + cj, j, eps})});
            }
          }
        }
      }
    }
  }
  const std::size_t n0 = terms_[0].size(), n1 = terms_[1].size();
  require(n0 * n1 <= 50'000'000, ErrorCode::kUnsupported, "shift has too many coefficient slots for this grid");
  coeffs_.assign(n0 * n1, 0.0);
  Rng rng(derive_seed(spec.seed, 0x5348));
  for (std::size_t a = 0; a < n0; ++a) {
    for (std::size_t b = 0; b < n1; ++b) {
      const auto& t0 = terms_[0][a];
      const auto& t1 = terms_[1][b];
      const ShiftTerm term{{t0.k, t1.k}, {t0.i, t1.i}, {t0.j, t1.j}};
      const double bound = shift_coefficient_bound(grid, term);
      cplx v = 0.0;
      switch (spec.coefficients) {
        case ShiftCoefficients::kRandomPhase:
          v = std::polar(bound, 2.0 * std::numbers::pi * uniform01(rng));
          break;
        case ShiftCoefficients::kCanonical:
          v = (t0.i == t0.j && t1.i == t1.j) ? cplx(bound) : cplx(0.0);
          break;
        case ShiftCoefficients::kCustom:
          require(static_cast<bool>(spec.custom), ErrorCode::kInvalidArgument, "custom shift needs a coefficient map");
          v = spec.custom(term);
          require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::kNonFinite,
                  "non-finite shift coefficient");
          require(std::abs(v) <= bound * (1.0 + 1e-12), ErrorCode::kInvalidArgument,
                  "shift coefficient exceeds sqrt(|I1||J1||I2||J2|)/(|K1||K2|)");
          break;
      }
      coeffs_[a * n1 + b] = v;
    }
  }
}

Field DyadicShift::transfer(const Field& f, bool adjoint) const {
  require(f.spec() == grid_, ErrorCode::kSpecMismatch, "shift applied to a field on another grid");
  const HaarTensor in = haar_analysis(f);
  std::vector<cplx> out(grid_.total_points(), 0.0);
  const std::size_t s0 = grid_.param_stride(0), s1 = grid_.param_stride(1);
  const std::size_t n1 = terms_[1].size();
  for (std::size_t a = 0; a < terms_[0].size(); ++a) {
    const auto& t0 = terms_[0][a];
    for (std::size_t b = 0; b < n1; ++b) {
      const auto& t1 = terms_[1][b];
      const cplx c = coeffs_[a * n1 + b];
      if (adjoint) {
        out[t0.i * s0 + t1.i * s1] += std::conj(c) * in[t0.j * s0 + t1.j * s1];
      } else {
        out[t0.j * s0 + t1.j * s1] += c * in[t0.i * s0 + t1.i * s1];
      }
    }
  }
  return haar_synthesis(HaarTensor(grid_, in.params(), std::move(out)));
}

Field DyadicShift::apply(const Field& f) const { return transfer(f, false); }
Field DyadicShift::apply_adjoint(const Field& f) const { return transfer(f, true); }

DyadicShift make_shift(const ShiftSpec& spec, const GridSpec& grid) { return DyadicShift(spec, grid); }
Field apply_shift(const DyadicShift& s, const Field& f) { return s.apply(f); }

// Paraproducts -----------------------------------------------------------------

ParaproductSpec ParaproductSpec::classical() { return ParaproductSpec{}; }

void ParaproductSpec::validate() const {
  const int depth[2] = {k, l};
  for (int v = 0; v < 2; ++v) {
    require(depth[v] >= 0, ErrorCode::kInvalidArgument, "paraproduct depths must be >= 0");
    if (depth[v] > 0) {
      require(input[v] == SlotKind::kCancellative && output[v] == SlotKind::kCancellative,
              ErrorCode::kInvalidArgument, "positive ancestor depth needs cancellative Haar functions");
    } else {
      require(!(input[v] == SlotKind::kAverage && output[v] == SlotKind::kAverage), ErrorCode::kInvalidArgument,
              "at most one non-cancellative function per variable");
    }
  }
}

ParaproductResult paraproduct(const ParaproductSpec& spec, const Field& b, const Field& f) {
  spec.validate();
  const GridSpec& g = b.spec();
  require(f.spec() == g, ErrorCode::kSpecMismatch, "paraproduct of fields on different grids");
  require(g.param_count() == 2 && g.param(0).dim == 1 && g.param(1).dim == 1, ErrorCode::kUnsupported,
          "paraproducts are implemented for two one-dimensional parameters");
  check_dyadic(g);
  const int n[2] = {g.param(0).points, g.param(1).points};
  const int anc[2] = {spec.k, spec.l};

  // Interval index j in [1, N): level floor(log2 j), position j - 2^level.
  // rows[v][kind][j][x]: value of the Haar / average function at cell x.
  auto table = [](int npts, SlotKind kind) {
    std::vector<std::vector<double>> t(static_cast<std::size_t>(npts), std::vector<double>(static_cast<std::size_t>(npts), 0.0));
    for (int j = 1; j < npts; ++j) {
      const int level = std::bit_width(static_cast<unsigned>(j)) - 1;
      const int pos = j - (1 << level);
      const int len = npts >> level;
      const double scale = std::pow(2.0, level / 2.0);  // |I|^{-1/2}
      for (int x = pos * len; x < (pos + 1) * len; ++x) {
        const bool lower = x < pos * len + len / 2;
        t[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)] =
            kind == SlotKind::kAverage ? scale : (lower ? scale : -scale);
      }
    }
    return t;
  };
  const auto in0 = table(n[0], spec.input[0]), in1 = table(n[1], spec.input[1]);
  const auto out0 = table(n[0], spec.output[0]), out1 = table(n[1], spec.output[1]);
  const double cell = g.cell_volume();
  const auto fs = f.samples();
  const HaarTensor bh = haar_analysis(b);
  const std::size_t s0 = g.param_stride(0);

  // <f, s_I x s_J>
  std::vector<cplx> tmp(static_cast<std::size_t>(n[0] * n[1]), 0.0), pair(tmp.size(), 0.0);
  for (int x = 0; x < n[0]; ++x) {
    for (int J = 1; J < n[1]; ++J) {
      cplx s = 0.0;
      for (int y = 0; y < n[1]; ++y) s += fs[static_cast<std::size_t>(x) * s0 + static_cast<std::size_t>(y)] * in1[static_cast<std::size_t>(J)][static_cast<std::size_t>(y)];
      tmp[static_cast<std::size_t>(x * n[1] + J)] = s;
    }
  }
  for (int I = 1; I < n[0]; ++I) {
    for (int J = 1; J < n[1]; ++J) {
      cplx s = 0.0;
      for (int x = 0; x < n[0]; ++x) s += in0[static_cast<std::size_t>(I)][static_cast<std::size_t>(x)] * tmp[static_cast<std::size_t>(x * n[1] + J)];
      pair[static_cast<std::size_t>(I * n[1] + J)] = s * cell;
    }
  }

  ParaproductResult res;
  Rng rng(derive_seed(spec.seed, 0x5041));
  std::vector<cplx> coef(pair.size(), 0.0);
  for (int I = 1; I < n[0]; ++I) {
    for (int J = 1; J < n[1]; ++J) {
      const double beta = spec.random_signs ? (uniform01(rng) < 0.5 ? -1.0 : 1.0) : 1.0;
      int ancestor[2];
      double inv_sqrt = 1.0;
      bool dropped = false;
      const int idx[2] = {I, J};
      for (int v = 0; v < 2; ++v) {
        const int level = std::bit_width(static_cast<unsigned>(idx[v])) - 1;
        if (level < anc[v]) {
          dropped = true;
          break;
        }
        const int alevel = level - anc[v];
        ancestor[v] = (1 << alevel) + ((idx[v] - (1 << level)) >> anc[v]);
        inv_sqrt *= std::pow(2.0, alevel / 2.0);
      }
      if (dropped) {
        ++res.dropped_terms;
        continue;
      }
      const cplx bc = bh[static_cast<std::size_t>(ancestor[0]) * s0 + static_cast<std::size_t>(ancestor[1])];
      coef[static_cast<std::size_t>(I * n[1] + J)] = beta * bc * pair[static_cast<std::size_t>(I * n[1] + J)] * inv_sqrt;
    }
  }

  // sum coef[I,J] o_I(x) o_J(y)
  std::vector<cplx> mid(static_cast<std::size_t>(n[0] * n[1]), 0.0), out(g.total_points(), 0.0);
  for (int I = 1; I < n[0]; ++I) {
    for (int y = 0; y < n[1]; ++y) {
      cplx s = 0.0;
      for (int J = 1; J < n[1]; ++J) s += coef[static_cast<std::size_t>(I * n[1] + J)] * out1[static_cast<std::size_t>(J)][static_cast<std::size_t>(y)];
      mid[static_cast<std::size_t>(I * n[1] + y)] = s;
    }
  }
  for (int x = 0; x < n[0]; ++x) {
    for (int y = 0; y < n[1]; ++y) {
      cplx s = 0.0;
      for (int I = 1; I < n[0]; ++I) s += out0[static_cast<std::size_t>(I)][static_cast<std::size_t>(x)] * mid[static_cast<std::size_t>(I * n[1] + y)];
      out[static_cast<std::size_t>(x) * s0 + static_cast<std::size_t>(y)] = s;
    }
  }
  res.value = Field(g, std::move(out));
  return res;
}

}  // namespace commlab
