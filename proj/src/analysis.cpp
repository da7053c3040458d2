#include "flexsusp/analysis.hpp"

#include "flexsusp/text.hpp"
#include "flexsusp/type3.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace flexsusp {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

}  // namespace

double interior_dihedral(const Vec3& a, const Vec3& b, const Vec3& c1, const Vec3& c2) {
  const Vec3 e = (b - a).normalized();
  const Vec3 p1 = (c1 - a) - (c1 - a).dot(e) * e;
  const Vec3 p2 = (c2 - a) - (c2 - a).dot(e) * e;
  // The outward normal of the first face is e x p1, so the solid lies on the
  // negative rotation side of p1.
  double th = std::atan2(-e.dot(p1.cross(p2)), p1.dot(p2));
  if (th < 0) th += 2 * pi;
  return th;
}

Dihedrals dihedrals(const Embedding& e) {
  const int n = e.n();
  Dihedrals d;
  d.eps.resize(n);
  d.delta.resize(n);
  d.Delta.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec3& vk = e.v[k];
    const Vec3& next = e.v[wrap(k + 1, n)];
    const Vec3& prev = e.v[wrap(k - 1, n)];
    d.eps[k] = interior_dihedral(vk, next, e.w, e.u);
    d.delta[k] = interior_dihedral(e.u, vk, prev, next);
    d.Delta[k] = interior_dihedral(e.w, vk, next, prev);
  }
  return d;
}

int DihedralTrace::feasible_count() const {
  return static_cast<int>(std::count(feasible.begin(), feasible.end(), 1));
}

DihedralTrace dihedral_trace(const ConstructedSuspension& s, const std::vector<double>& z) {
  const auto& p = s.params;
  const int n = p.n;
  const auto fa = face_angles_of(p);
  DihedralTrace t;
  t.z = z;
  for (double zi : z) {
    std::vector<double> eps(n, nan), delta(n, nan), Delta(n, nan);
    double vol = nan, gap = nan, dev = nan;
    char ok = 0;
    try {
      const auto e = embed(p, zi, s.theta1, s.signs);
      const auto d = dihedrals(e);
      eps = d.eps;
      delta = d.delta;
      Delta = d.Delta;
      vol = signed_volume(e);
      gap = closure_gap(e, p.L.back());
      t.diameter = std::max(t.diameter, diameter(e.points()));
      dev = 0;
      for (int k = 0; k < n; ++k) {
        const double folded = std::min(d.eps[k], 2 * pi - d.eps[k]);
        try {
          dev = std::max(dev, std::abs(folded - dihedral_from_z(p.l[k], p.m[k], fa.beta[k], fa.B[k], zi)));
        } catch (const Error&) {
          dev = std::numeric_limits<double>::infinity();
        }
      }
      ok = 1;
    } catch (const Error&) {
    }
    t.eps.push_back(std::move(eps));
    t.delta.push_back(std::move(delta));
    t.Delta.push_back(std::move(Delta));
    t.volume.push_back(vol);
    t.gap.push_back(gap);
    t.eq3_deviation.push_back(dev);
    t.feasible.push_back(ok);
  }
  return t;
}

DihedralTrace dihedral_trace(const ConstructedSuspension& s, int samples, double fraction) {
  const auto iv = flexion_interval(s.params, s.theta1, s.signs);
  auto t = dihedral_trace(s, chebyshev_samples(iv, samples, fraction));
  t.interval = iv;
  return t;
}

double unwrapped_range(const std::vector<double>& angles) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double offset = 0, prev = nan;
  for (double a : angles) {
    if (!std::isfinite(a)) continue;
    if (std::isfinite(prev)) {
      const double step = a - prev;
      if (step > pi) offset -= 2 * pi;
      else if (step < -pi) offset += 2 * pi;
    }
    prev = a;
    lo = std::min(lo, a + offset);
    hi = std::max(hi, a + offset);
  }
  return hi >= lo ? hi - lo : 0.0;
}

double min_dihedral_range(const DihedralTrace& t) {
  if (t.z.empty()) return 0.0;
  const int n = static_cast<int>(t.eps.front().size());
  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> column(t.samples());
  for (const auto* family : {&t.eps, &t.delta, &t.Delta}) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < t.samples(); ++i) column[i] = (*family)[i][k];
      worst = std::min(worst, unwrapped_range(column));
    }
  }
  return worst;
}

bool strong_flexibility(const DihedralTrace& t, double threshold) {
  return t.feasible_count() >= 2 && min_dihedral_range(t) >= threshold;
}

double signed_volume(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size()) - 2;
  const Vec3& u = pts[0];
  const Vec3& w = pts[1];
  double sum = 0;
  for (int k = 0; k < n; ++k) {
    const Vec3& a = pts[2 + k];
    const Vec3& b = pts[2 + wrap(k + 1, n)];
    sum += triple(u, b, a) + triple(w, a, b);
  }
  return sum / 6.0;
}

double signed_volume(const Embedding& e) { return signed_volume(e.points()); }

std::vector<double> face_pair_cancellation(const Embedding& e, SuspensionType t) {
  const int n = e.n(), M = n / 2;
  auto upper = [&](int k) { return triple(e.u, e.v[wrap(k + 1, n)], e.v[wrap(k, n)]) / 6.0; };
  auto lower = [&](int k) { return triple(e.w, e.v[wrap(k, n)], e.v[wrap(k + 1, n)]) / 6.0; };
  std::vector<double> out;
  switch (t) {
    case SuspensionType::I_OEE:
      for (int k = 0; k < n; ++k) out.push_back(upper(k) + lower(k + M));
      break;
    case SuspensionType::II_OEE:
      for (int k = 0; k < M; ++k) {
        out.push_back(upper(k) + upper(k + M));
        out.push_back(lower(k) + lower(k + M));
      }
      break;
    case SuspensionType::II_AEE:
      // Face k mirrors face N+1-k.
      for (int k = 0; k < n; ++k) out.push_back(upper(k) + lower(n - 1 - k));
      break;
    default:
      throw Error(ErrorKind::ClassificationUnavailable, "face pairing is defined for the symmetric types");
  }
  return out;
}

double diameter(const std::vector<Vec3>& pts) {
  double d = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

bool bellows_check(const DihedralTrace& t, bool expect_zero) {
  const double tol = 1e-9 * std::pow(t.diameter, 3);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  int count = 0;
  for (std::size_t i = 0; i < t.volume.size(); ++i) {
    if (!t.feasible[i]) continue;
    lo = std::min(lo, t.volume[i]);
    hi = std::max(hi, t.volume[i]);
    ++count;
  }
  if (count < 2) return false;
  if (hi - lo > tol) return false;
  return !expect_zero || std::max(std::abs(lo), std::abs(hi)) <= tol;
}

RankResult rigidity_jacobian_rank(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size()) - 2;
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k < n; ++k) {
    edges.emplace_back(0, 2 + k);
    edges.emplace_back(1, 2 + k);
    edges.emplace_back(2 + k, 2 + wrap(k + 1, n));
  }
  const double diam = diameter(pts);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<int>(edges.size()), 3 * (n + 2));
  for (int row = 0; row < static_cast<int>(edges.size()); ++row) {
    const auto [a, b] = edges[row];
    const Vec3 d = pts[a] - pts[b];
    if (!(d.norm() > 1e-12 * diam))
      throw Error(ErrorKind::DegenerateConfiguration, "edge of zero length", row + 1);
    J.block<1, 3>(row, 3 * a) = d.transpose();
    J.block<1, 3>(row, 3 * b) = -d.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  RankResult r;
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double cut = 1e-8 * (sv.size() ? sv(0) : 0.0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r.rank;
  r.flex_dim = 3 * (n + 2) - 6 - r.rank;
  return r;
}

RankResult rigidity_jacobian_rank(const Embedding& e) { return rigidity_jacobian_rank(e.points()); }

double coplanarity(const std::vector<Vec3>& pts) {
  Eigen::MatrixXd X(static_cast<int>(pts.size()), 3);
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  for (int i = 0; i < X.rows(); ++i) X.row(i) = (pts[i] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  return svd.singularValues()(2);
}

double vertex_value(double delta, double eps, VertexClass c) {
  return c == VertexClass::OAE ? vp(delta, eps) : 1.0 / vr(delta, eps);
}

double TetrahedralResiduals::max_branch() const {
  return branch.empty() ? 0.0 : *std::max_element(branch.begin(), branch.end());
}

double TetrahedralResiduals::max_reduction() const {
  double m = 0;
  for (const auto* v : {&eps_reduction, &delta_reduction})
    for (double x : *v) m = std::max(m, x);
  return m;
}

double TetrahedralResiduals::max_pair() const {
  return pair_residual.empty() ? 0.0 : *std::max_element(pair_residual.begin(), pair_residual.end());
}

bool TetrahedralResiduals::all_constant() const {
  return std::all_of(branch_constant.begin(), branch_constant.end(), [](bool b) { return b; });
}

TetrahedralResiduals tetrahedral_angle_residuals(const ConstructedSuspension& s, const DihedralTrace& t) {
  const auto classes = vertex_classes(s);
  const auto& p = s.params;
  const int n = p.n, M = n / 2;
  const auto f = face_angles_of(p);

  TetrahedralResiduals r;
  r.branch.assign(n, 0.0);
  r.branch_printed.assign(n, 0.0);
  r.branch_used.assign(n, -1);
  r.branch_constant.assign(n, true);
  r.eps_reduction.assign(n, 0.0);
  r.delta_reduction.assign(n, 0.0);
  r.opposite_eps.assign(n, 0.0);
  r.opposite_delta.assign(n, 0.0);
  r.pairs.emplace_back(1, 3);
  for (int k = 1; k <= M - 2; ++k) r.pairs.emplace_back(2 * k, 2 * k + 3);
  r.pairs.emplace_back(n - 2, n);
  r.pair_residual.assign(r.pairs.size(), 0.0);

  auto rel = [](double value, double ref) { return std::abs(value - ref) / std::max(1.0, std::abs(ref)); };

  for (int i = 0; i < t.samples(); ++i) {
    if (!t.feasible[i]) continue;
    const auto& eps = t.eps[i];
    const auto& delta = t.delta[i];
    const auto& Delta = t.Delta[i];
    std::vector<double> value(n, nan);
    for (int k = 0; k < n; ++k) {
      const int km = wrap(k - 1, n);
      const double be = f.beta[k], Be = f.B[k], ga = f.gamma[km], Ga = f.Gamma[km];
      r.eps_reduction[k] = std::max(r.eps_reduction[k], std::abs(std::cos(eps[km]) - std::cos(eps[k])));
      r.delta_reduction[k] = std::max(r.delta_reduction[k], std::abs(std::cos(delta[k]) - std::cos(Delta[k])));
      const double lhs_e = std::cos(ga) * std::cos(Ga) + std::sin(ga) * std::sin(Ga) * std::cos(eps[km]);
      const double rhs_e = std::cos(be) * std::cos(Be) + std::sin(be) * std::sin(Be) * std::cos(eps[k]);
      r.opposite_eps[k] = std::max(r.opposite_eps[k], std::abs(lhs_e - rhs_e));
      const double lhs_d = std::cos(ga) * std::cos(be) + std::sin(ga) * std::sin(be) * std::cos(delta[k]);
      const double rhs_d = std::cos(Ga) * std::cos(Be) + std::sin(Ga) * std::sin(Be) * std::cos(Delta[k]);
      r.opposite_delta[k] = std::max(r.opposite_delta[k], std::abs(lhs_d - rhs_d));

      try {
        const double c = cr(Be, be), sn = sr(Be, be);
        double res[2], printed;
        if (classes[k] == VertexClass::OAE) {
          const double V = vp(delta[k], eps[k]);
          value[k] = V;
          res[0] = rel(V, c);
          res[1] = rel(V, sn);
          printed = std::min(rel(V, c), rel(V, -sn));
        } else {
          const double V = vr(delta[k], eps[k]);
          value[k] = 1.0 / V;
          res[0] = rel(1.0 / V, -c);
          res[1] = rel(1.0 / V, -sn);
          printed = std::min(rel(V, -c), rel(V, sn));
        }
        const int b = res[0] <= res[1] ? 0 : 1;
        r.branch[k] = std::max(r.branch[k], res[b]);
        r.branch_printed[k] = std::max(r.branch_printed[k], printed);
        if (res[b] <= 1e-8) {
          if (r.branch_used[k] < 0) r.branch_used[k] = b;
          else if (r.branch_used[k] != b) r.branch_constant[k] = false;
        }
      } catch (const Error&) {
        ++r.poles;
      }
    }
    for (std::size_t q = 0; q < r.pairs.size(); ++q) {
      const double a = value[r.pairs[q].first - 1], b = value[r.pairs[q].second - 1];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      r.pair_residual[q] = std::max(r.pair_residual[q], rel(std::abs(b), std::abs(a)));
    }
  }
  return r;
}

FlexVerdict verify_flexible(const ConstructedSuspension& s, const VerifyOptions& opt) {
  FlexVerdict v;
  try {
    v.interval = flexion_interval(s.params, s.theta1, s.signs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyInterval) throw;
    v.inconclusive = true;
    v.details = "empty flexion interval";
    return v;
  }
  auto t = dihedral_trace(s, chebyshev_samples(v.interval, opt.samples));
  t.interval = v.interval;
  v.feasible_samples = t.feasible_count();
  if (v.feasible_samples < 2) {
    v.inconclusive = true;
    v.details = "fewer than two feasible samples";
    return v;
  }
  const double LN = s.params.L.back();
  for (int i = 0; i < t.samples(); ++i) {
    if (!t.feasible[i]) continue;
    v.max_rel_gap_deviation = std::max(v.max_rel_gap_deviation, std::abs(t.gap[i]) / LN);
    v.volume_max_abs = std::max(v.volume_max_abs, std::abs(t.volume[i]));
    v.eq3_max_deviation = std::max(v.eq3_max_deviation, t.eq3_deviation[i]);
  }
  v.flexible = v.max_rel_gap_deviation <= opt.tol;
  v.bellows = bellows_check(t, true);
  auto central = dihedral_trace(s, chebyshev_samples(v.interval, opt.samples, 0.8));
  v.min_dihedral_range = min_dihedral_range(central);
  v.strong = central.feasible_count() >= 2 && v.min_dihedral_range >= opt.strong_threshold;
  v.details = "gap " + number(v.max_rel_gap_deviation, 3) + ", min dihedral range " + number(v.min_dihedral_range, 3) +
              ", |volume| " + number(v.volume_max_abs, 3);
  return v;
}

}  // namespace flexsusp
