#include "commlab/commutator.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "commlab/rng.hpp"

namespace commlab {

namespace {

using nlohmann::json;

std::set<std::size_t> merged(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty() || b.empty()) return {};
  std::set<std::size_t> out = a;
  out.insert(b.begin(), b.end());
  return out;
}

Field random_field(const GridSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x4e4f));
  std::vector<cplx> v(spec.total_points());
  for (auto& x : v) {
    const double re = standard_normal(rng);
    x = {re, standard_normal(rng)};
  }
  return Field(spec, std::move(v));
}

using Mat = Eigen::MatrixXcd;

Mat materialize(const LinearOperator& a) {
  const std::size_t n = a.spec().total_points();
  Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Field e(a.spec());
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1.0;
    const Field col = a.apply(e);
    e[i] = 0.0;
    for (std::size_t r = 0; r < n; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = col[r];
  }
  return m;
}

}  // namespace

LinearOperator::LinearOperator(GridSpec spec, Fn apply, Fn adjoint, nlohmann::json descriptor,
                               std::set<std::size_t> params)
    : spec_(std::move(spec)), apply_(std::move(apply)), adjoint_(std::move(adjoint)),
      descriptor_(std::move(descriptor)), params_(std::move(params)) {}

Field LinearOperator::apply(const Field& f) const {
  require(f.spec() == spec_, ErrorCode::kSpecMismatch, "operator applied to a field on another grid");
  return apply_(f);
}

Field LinearOperator::apply_adjoint(const Field& f) const {
  require(f.spec() == spec_, ErrorCode::kSpecMismatch, "operator applied to a field on another grid");
  return adjoint_(f);
}

LinearOperator LinearOperator::adjoint() const {
  return LinearOperator(spec_, adjoint_, apply_, {{"kind", "adjoint"}, {"of", descriptor_}}, params_);
}

LinearOperator identity_operator(const GridSpec& spec) {
  auto id = [](const Field& f) { return f; };
  return LinearOperator(spec, id, id, {{"kind", "identity"}});
}

LinearOperator multiplier_operator(const Multiplier& m) {
  auto fwd = std::make_shared<Multiplier>(m);
  auto bwd = std::make_shared<Multiplier>(adjoint(m));
  return LinearOperator(
      m.spec(), [fwd](const Field& f) { return apply(*fwd, f); }, [bwd](const Field& f) { return apply(*bwd, f); },
      m.descriptor(), m.params());
}

LinearOperator shift_operator(const DyadicShift& s) {
  auto sp = std::make_shared<DyadicShift>(s);
  json d = s.spec().to_json();
  d["kind"] = "shift";
  return LinearOperator(
      s.grid(), [sp](const Field& f) { return sp->apply(f); }, [sp](const Field& f) { return sp->apply_adjoint(f); },
      d, {0, 1});
}

LinearOperator multiplication_operator(const Field& b) {
  require(b.all_finite(), ErrorCode::kNonFinite, "symbol has non-finite values");
  auto bp = std::make_shared<Field>(b);
  auto bc = std::make_shared<Field>(conj(b));
  return LinearOperator(
      b.spec(), [bp](const Field& f) { return pointwise(*bp, f); }, [bc](const Field& f) { return pointwise(*bc, f); },
      {{"kind", "multiply"}});
}

LinearOperator compose(const LinearOperator& a, const LinearOperator& b) {
  require(a.spec() == b.spec(), ErrorCode::kSpecMismatch, "composing operators on different grids");
  return LinearOperator(
      a.spec(), [a, b](const Field& f) { return a.apply(b.apply(f)); },
      [a, b](const Field& f) { return b.apply_adjoint(a.apply_adjoint(f)); },
      {{"kind", "compose"}, {"factors", {a.descriptor(), b.descriptor()}}}, merged(a.params(), b.params()));
}

LinearOperator sum(const LinearOperator& a, const LinearOperator& b) {
  require(a.spec() == b.spec(), ErrorCode::kSpecMismatch, "adding operators on different grids");
  return LinearOperator(
      a.spec(), [a, b](const Field& f) { return a.apply(f) + b.apply(f); },
      [a, b](const Field& f) { return a.apply_adjoint(f) + b.apply_adjoint(f); },
      {{"kind", "sum"}, {"terms", {a.descriptor(), b.descriptor()}}}, merged(a.params(), b.params()));
}

LinearOperator scale(const LinearOperator& a, cplx s) {
  return LinearOperator(
      a.spec(), [a, s](const Field& f) { return s * a.apply(f); },
      [a, s](const Field& f) { return std::conj(s) * a.apply_adjoint(f); },
      {{"kind", "scale"}, {"by", {s.real(), s.imag()}}, {"of", a.descriptor()}}, a.params());
}

LinearOperator commutator(const LinearOperator& t, const Field& b) {
  require(t.spec() == b.spec(), ErrorCode::kSpecMismatch, "commutator symbol lives on another grid");
  require(b.all_finite(), ErrorCode::kNonFinite, "symbol has non-finite values");
  auto bp = std::make_shared<Field>(b);
  auto bc = std::make_shared<Field>(conj(b));
  // [T,b]* = b* T* - T* b* = -[T*, conj b]
  return LinearOperator(
      t.spec(), [t, bp](const Field& f) { return t.apply(pointwise(*bp, f)) - pointwise(*bp, t.apply(f)); },
      [t, bc](const Field& f) { return pointwise(*bc, t.apply_adjoint(f)) - t.apply_adjoint(pointwise(*bc, f)); },
      {{"kind", "commutator"}, {"op", t.descriptor()}}, t.params());
}

namespace {

// [T, X] for a general operator X.
LinearOperator bracket(const LinearOperator& t, const LinearOperator& x) {
  return LinearOperator(
      t.spec(), [t, x](const Field& f) { return t.apply(x.apply(f)) - x.apply(t.apply(f)); },
      [t, x](const Field& f) { return x.apply_adjoint(t.apply_adjoint(f)) - t.apply_adjoint(x.apply_adjoint(f)); },
      {{"kind", "commutator"}, {"op", t.descriptor()}, {"inner", x.descriptor()}}, merged(t.params(), x.params()));
}

}  // namespace

LinearOperator iterated_commutator(const std::vector<LinearOperator>& ts, const Field& b,
                                   std::vector<std::string>* warnings) {
  require(!ts.empty(), ErrorCode::kInvalidArgument, "iterated commutator needs at least one operator");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      const auto& a = ts[i].params();
      const auto& c = ts[j].params();
      bool overlap = a.empty() || c.empty();
      for (auto k : a) overlap = overlap || c.count(k);
      if (overlap && warnings) {
        warnings->push_back("operators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                            " may act on shared parameters");
      }
    }
  }
  LinearOperator c = commutator(ts.back(), b);
  for (std::size_t i = ts.size() - 1; i-- > 0;) c = bracket(ts[i], c);
  return c;
}

nlohmann::json NormEstimate::to_json() const {
  return {{"value", value},
          {"method", method == NormMethod::kPower ? "power" : "dense"},
          {"iterations", iterations},
          {"residual", residual},
          {"seed", seed},
          {"converged", converged}};
}

NormEstimate operator_norm(const LinearOperator& a, NormMethod method, double tol, int max_iter,
                           std::uint64_t seed) {
  require(tol > 0.0 && max_iter >= 1, ErrorCode::kInvalidArgument, "norm estimation needs tol > 0, max_iter >= 1");
  NormEstimate est;
  est.method = method;
  est.seed = seed;
  const std::size_t n = a.spec().total_points();

  if (method == NormMethod::kDense) {
    require(n <= kDenseLimit, ErrorCode::kInvalidArgument,
            "dense norm needs at most " + std::to_string(kDenseLimit) + " points");
    const Mat m = materialize(a);
    if (n <= 1024) {
      Eigen::BDCSVD<Mat> svd(m);
      est.value = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
      est.iterations = 1;
      return est;
    }
    Rng rng(derive_seed(seed, 0x444e));
    Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
    for (auto& v : x) {
      const double re = standard_normal(rng);
      v = {re, standard_normal(rng)};
    }
    x.normalize();
    double prev = 0.0;
    est.converged = false;
    for (int it = 1; it <= 100000; ++it) {
      const Eigen::VectorXcd y = m * x;
      const Eigen::VectorXcd z = m.adjoint() * y;
      const double sigma = y.norm();
      est.iterations = it;
      est.value = sigma;
      const double zn = z.norm();
      if (zn == 0.0) {
        est.converged = true;
        break;
      }
      est.residual = (z - sigma * sigma * x).norm() / std::max(sigma * sigma, 1e-300);
      x = z / zn;
      if (it > 1 && std::abs(sigma - prev) <= 1e-10 * sigma) {
        est.converged = true;
        break;
      }
      prev = sigma;
    }
    return est;
  }

  Field x = random_field(a.spec(), seed);
  x *= 1.0 / l2_norm(x);
  double prev = 0.0;
  est.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const Field y = a.apply(x);
    const Field z = a.apply_adjoint(y);
    const double sigma = l2_norm(y);  // sqrt(<A*A x, x>) with |x| = 1
    est.iterations = it;
    est.value = std::max(est.value, sigma);
    const double zn = l2_norm(z);
    if (zn == 0.0) {
      est.converged = true;
      est.residual = 0.0;
      break;
    }
    est.residual = l2_norm(z - (sigma * sigma) * x) / std::max(sigma * sigma, 1e-300);
    x = (1.0 / zn) * z;
    if (it > 1 && std::abs(sigma - prev) <= tol * sigma) {
      est.converged = true;
      break;
    }
    prev = sigma;
  }
  return est;
}

Field opposing_test_function(const GridSpec& spec, const std::vector<ConeSpec>& cones, std::uint64_t seed) {
  std::vector<const ConeSpec*> by_param(spec.param_count(), nullptr);
  for (const auto& c : cones) {
    c.validate(spec);
    require(by_param[c.param] == nullptr, ErrorCode::kInvalidArgument, "one cone per parameter");
    by_param[c.param] = &c;
  }
  // Per-parameter coefficient tables over the parameter's local frequencies.
  std::vector<std::vector<cplx>> coef(spec.param_count());
  for (std::size_t k = 0; k < spec.param_count(); ++k) {
    const int d = spec.param(k).dim, n = spec.param(k).points;
    coef[k].assign(spec.param_points(k), 0.0);
    if (!by_param[k]) {
      coef[k][0] = 1.0;
      continue;
    }
    ConeSpec opp = *by_param[k];
    for (auto& x : opp.direction) x = -x;
    Rng rng(derive_seed(seed, k));
    std::vector<double> eta(static_cast<std::size_t>(d));
    std::size_t hits = 0;
    for (std::size_t q = 0; q < coef[k].size(); ++q) {
      std::size_t rest = q;
      bool zero = true;
      for (int a = d - 1; a >= 0; --a) {
        eta[static_cast<std::size_t>(a)] = axis_frequency(static_cast<int>(rest % static_cast<std::size_t>(n)), n);
        zero = zero && eta[static_cast<std::size_t>(a)] == 0.0;
        rest /= static_cast<std::size_t>(n);
      }
      const double re = standard_normal(rng), im = standard_normal(rng);
      if (zero || cone_gauge(opp, eta) > 1.0) continue;
      coef[k][q] = {re, im};
      ++hits;
    }
    if (hits == 0) {
      std::string hint = "";
      for (int m = n * 2; m <= 1024; m *= 2) {
        const int half = m / 2;
        bool found = false;
        std::vector<int> idx(static_cast<std::size_t>(d), -half);
        while (!found) {
          bool nz = false;
          for (int a = 0; a < d; ++a) {
            eta[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(a)];
            nz = nz || idx[static_cast<std::size_t>(a)] != 0;
          }
          if (nz && cone_gauge(opp, eta) <= 1.0) found = true;
          int a = d - 1;
          while (a >= 0 && ++idx[static_cast<std::size_t>(a)] >= half) idx[static_cast<std::size_t>(a--)] = -half;
          if (a < 0) break;
        }
        if (found) {
          hint = "; N_" + std::to_string(k + 1) + " >= " + std::to_string(m) + " has lattice points in it";
          break;
        }
      }
      throw Error(ErrorCode::kInvalidArgument,
                  "opposing cone of parameter " + std::to_string(k + 1) + " contains no lattice frequency" + hint);
    }
  }
  std::vector<cplx> hat(spec.total_points());
  std::vector<std::size_t> local(spec.param_count());
  for (std::size_t flat = 0; flat < hat.size(); ++flat) {
    spec.split(flat, local);
    cplx v = 1.0;
    for (std::size_t k = 0; k < spec.param_count(); ++k) v *= coef[k][local[k]];
    hat[flat] = v;
  }
  Field f = inverse_transform(FreqField(spec, std::move(hat)));
  f *= 1.0 / l2_norm(f);
  return f;
}

Field pi_form(const Field& f, const Field& g, const std::vector<LinearOperator>& ts) {
  require(!ts.empty(), ErrorCode::kInvalidArgument, "pi_form needs at least one operator");
  require(f.spec() == g.spec(), ErrorCode::kSpecMismatch, "pi_form inputs on different grids");
  for (const auto& t : ts) require(t.spec() == f.spec(), ErrorCode::kSpecMismatch, "operator on another grid");
  const std::size_t l = ts.size();
  require(l < 20, ErrorCode::kInvalidArgument, "too many operators for pi_form");
  Field out(f.spec());
  for (std::size_t mask = 0; mask < (std::size_t{1} << l); ++mask) {
    // Bit i set: T_{i+1} sits on the right of b.
    Field r = f, lg = g;
    int right = 0;
    for (std::size_t i = 0; i < l; ++i) {
      if ((mask >> i) & 1) {
        r = ts[i].apply(r);
        ++right;
      } else {
        lg = ts[i].apply_adjoint(lg);
      }
    }
    Field term = pointwise(conj(r), lg);
    if (right & 1) {
      out -= term;
    } else {
      out += term;
    }
  }
  return out;
}

}  // namespace commlab
