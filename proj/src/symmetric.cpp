#include "flexsusp/symmetric.hpp"

#include "flexsusp/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flexsusp {

namespace {

void check_half(int M, std::initializer_list<const std::vector<double>*> arrays, std::size_t expected) {
  if (M <= 2) throw Error(ErrorKind::InvalidHalfParams, "M must exceed 2");
  for (const auto* a : arrays) {
    if (a->size() != expected) throw Error(ErrorKind::InvalidHalfParams, "array length does not match M");
    for (std::size_t k = 0; k < a->size(); ++k)
      if (!std::isfinite((*a)[k]) || (*a)[k] <= 0)
        throw Error(ErrorKind::InvalidHalfParams, "lengths must be positive", static_cast<int>(k) + 1);
  }
}

ConstructedSuspension assemble(SuspensionParams p, SuspensionType t, Theta1Rule theta1, const char* generator) {
  const auto report = validate_params(p);
  if (!report.ok()) throw Error(ErrorKind::InvalidHalfParams, report.summary());
  ConstructedSuspension s;
  s.params = std::move(p);
  s.type = t;
  s.theta1 = theta1;
  s.signs = default_signs(s.params.n);
  s.provenance["generator"] = generator;
  return s;
}

ConstructedSuspension certify(ConstructedSuspension s) {
  double gap;
  try {
    gap = max_relative_gap(s.params, s.theta1, s.signs);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptyInterval) throw Error(ErrorKind::InvalidHalfParams, "empty flexion interval");
    throw;
  }
  if (!(gap <= 1e-9)) throw Error(ErrorKind::FlexCertificationFailed, "closure gap varies by " + number(gap, 3));
  return s;
}

ConstructedSuspension assemble(const HalfParamsIOEE& h) {
  auto s = assemble(expand(h), SuspensionType::I_OEE, Theta1Rule::symmetric_half(), "build_I_OEE");
  s.provenance["l_half"] = join(h.l);
  s.provenance["m_half"] = join(h.m);
  s.provenance["L_half"] = join(h.L);
  return s;
}

ConstructedSuspension assemble(const HalfParamsIIAEE& h) {
  auto s = assemble(expand(h), SuspensionType::II_AEE, Theta1Rule::fixed(0.0), "build_II_AEE");
  s.provenance["l"] = join(h.l);
  s.provenance["L_half"] = join(h.L);
  return s;
}

ConstructedSuspension assemble(const HalfParamsIIOEE& h) {
  auto s = assemble(expand(h), SuspensionType::II_OEE, Theta1Rule::symmetric_half(), "build_II_OEE");
  s.provenance["l_half"] = join(h.l);
  s.provenance["m_half"] = join(h.m);
  s.provenance["L_half"] = join(h.L);
  return s;
}

}  // namespace

SuspensionParams expand(const HalfParamsIOEE& h) {
  check_half(h.M, {&h.l, &h.m, &h.L}, static_cast<std::size_t>(h.M));
  const int M = h.M, n = 2 * M;
  SuspensionParams p;
  p.n = n;
  p.l.resize(n);
  p.m.resize(n);
  p.L.resize(n);
  for (int k = 0; k < M; ++k) {
    p.l[k] = h.l[k];
    p.m[k] = h.m[k];
    p.L[k] = h.L[k];
    p.l[k + M] = h.m[k];
    p.m[k + M] = h.l[k];
    p.L[k + M] = h.L[k];
  }
  return p;
}

SuspensionParams expand(const HalfParamsIIAEE& h) {
  if (h.M <= 2) throw Error(ErrorKind::InvalidHalfParams, "M must exceed 2");
  const int M = h.M, n = 2 * M;
  check_half(M, {&h.l}, static_cast<std::size_t>(n));
  check_half(M, {&h.L}, static_cast<std::size_t>(M));
  SuspensionParams p;
  p.n = n;
  p.l = h.l;
  p.m.resize(n);
  p.L.resize(n);
  for (int k = 0; k < n; ++k) p.m[k] = h.l[wrap(n - k, n)];  // m_k = l_{N-k+2}
  for (int k = 0; k < M; ++k) {
    p.L[k] = h.L[k];
    p.L[k + M] = h.L[M - 1 - k];  // L_{k+M} = L_{M-k+1}
  }
  if (!h.m.empty()) {
    check_half(M, {&h.m}, static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      if (std::abs(h.m[k] - p.m[k]) > 1e-12 * std::max(1.0, p.m[k]))
        throw Error(ErrorKind::InvalidHalfParams, "m breaks the mirror relation m_k = l_{N-k+2}", k + 1);
  }
  return p;
}

SuspensionParams expand(const HalfParamsIIOEE& h) {
  check_half(h.M, {&h.l, &h.m, &h.L}, static_cast<std::size_t>(h.M));
  const int M = h.M, n = 2 * M;
  SuspensionParams p;
  p.n = n;
  for (int k = 0; k < n; ++k) {
    p.l.push_back(h.l[k % M]);
    p.m.push_back(h.m[k % M]);
    p.L.push_back(h.L[k % M]);
  }
  return p;
}

ConstructedSuspension build_I_OEE(const HalfParamsIOEE& h) { return certify(assemble(h)); }
ConstructedSuspension build_II_AEE(const HalfParamsIIAEE& h) { return certify(assemble(h)); }
ConstructedSuspension build_II_OEE(const HalfParamsIIOEE& h) { return certify(assemble(h)); }

double symmetry_defect(SuspensionType t, const Embedding& e) {
  const int n = e.n(), M = n / 2;
  double worst = 0;
  auto track = [&](const Vec3& a, const Vec3& b) { worst = std::max(worst, (a - b).cwiseAbs().maxCoeff()); };
  switch (t) {
    case SuspensionType::I_OEE:
      for (int k = 0; k < M; ++k) track(e.v[k + M], Vec3(-e.v[k].x(), e.v[k].y(), -e.v[k].z()));
      break;
    case SuspensionType::II_OEE:
      for (int k = 0; k < M; ++k) track(e.v[k + M], Vec3(-e.v[k].x(), e.v[k].y(), e.v[k].z()));
      break;
    case SuspensionType::II_AEE:
      // v_j mirrors v_{N+2-j} through the plane z = 0.
      for (int j = 1; j < n; ++j) {
        const Vec3& a = e.v[j];
        track(e.v[n - j], Vec3(a.x(), a.y(), -a.z()));
      }
      track(e.v[0], Vec3(e.v[0].x(), e.v[0].y(), -e.v[0].z()));
      break;
    default:
      throw Error(ErrorKind::ClassificationUnavailable, "no coordinate symmetry for Type III");
  }
  return worst;
}

double max_relative_gap(const SuspensionParams& p, const Theta1Rule& theta1, const SignPattern& signs, int samples) {
  const auto iv = flexion_interval(p, theta1, signs);
  double worst = 0;
  int good = 0;
  for (double z : chebyshev_samples(iv, samples)) {
    try {
      const auto e = embed(p, z, theta1, signs);
      worst = std::max(worst, std::abs(closure_gap(e, p.L.back())) / p.L.back());
      ++good;
    } catch (const Error&) {
    }
  }
  return good ? worst : std::numeric_limits<double>::infinity();
}

std::optional<ConstructedSuspension> random_symmetric(SuspensionType t, int M, std::mt19937_64& rng,
                                                      int max_rejections, DrawStats* stats) {
  std::uniform_real_distribution<double> u(std::log(0.5), std::log(2.0));
  auto draw = [&](int count) {
    std::vector<double> v(count);
    for (auto& x : v) x = std::exp(u(rng));
    return v;
  };
  for (int attempt = 0; attempt <= max_rejections; ++attempt) {
    try {
      ConstructedSuspension s;
      switch (t) {
        case SuspensionType::I_OEE: s = assemble(HalfParamsIOEE{M, draw(M), draw(M), draw(M)}); break;
        case SuspensionType::II_AEE: s = assemble(HalfParamsIIAEE{M, draw(2 * M), draw(M), {}}); break;
        case SuspensionType::II_OEE: s = assemble(HalfParamsIIOEE{M, draw(M), draw(M), draw(M)}); break;
        default: throw Error(ErrorKind::InvalidParams, "random draws cover the symmetric types only");
      }
      flexion_interval(s.params);
      return s;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidHalfParams && e.kind() != ErrorKind::EmptyInterval) throw;
    }
    if (stats) ++stats->rejections;
  }
  return std::nullopt;
}

}  // namespace flexsusp
