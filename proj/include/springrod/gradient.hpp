#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "springrod/engine.hpp"

namespace springrod {

/// Gradient of a scalar loss with respect to every ParamSet entry, laid out
/// like the ParamSet itself.
struct ParamGradient {
  struct SpringGrad {
    double K = 0.0, c = 0.0, L0 = 0.0;
  };
  struct RodGrad {
    double M = 0.0, I = 0.0;
  };
  std::vector<SpringGrad> springs;
  std::vector<RodGrad> rods;
  std::vector<double> control_scale;

  /// Flat layout: (K,c,L0) per group, (M,I) per rod entry, h per control
  /// group. Matches flatten_params.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(3 * springs.size() + 2 * rods.size() + control_scale.size());
    for (const auto& s : springs) {
      out.push_back(s.K);
      out.push_back(s.c);
      out.push_back(s.L0);
    }
    for (const auto& r : rods) {
      out.push_back(r.M);
      out.push_back(r.I);
    }
    for (double h : control_scale) out.push_back(h);
    return out;
  }
};

inline std::vector<double> flatten_params(const ParamSet& p) {
  std::vector<double> out;
  out.reserve(3 * p.springs.size() + 2 * p.rods.size() +
              p.control_scale.size());
  for (const auto& s : p.springs) {
    out.push_back(s.K);
    out.push_back(s.c);
    out.push_back(s.L0);
  }
  for (const auto& r : p.rods) {
    out.push_back(r.M);
    out.push_back(r.I);
  }
  for (double h : p.control_scale) out.push_back(h);
  return out;
}

inline ParamSet unflatten_params(const ParamSet& shape,
                                 std::span<const double> flat) {
  ParamSet p = shape;
  std::size_t j = 0;
  for (auto& s : p.springs) {
    s.K = flat[j++];
    s.c = flat[j++];
    s.L0 = flat[j++];
  }
  for (auto& r : p.rods) {
    r.M = flat[j++];
    r.I = flat[j++];
  }
  for (auto& h : p.control_scale) h = flat[j++];
  return p;
}

namespace detail {

/// Tangent of the normalized-quaternion step output for a tangent dalpha of
/// the angular acceleration. q_pre is the un-normalized updated quaternion,
/// q_next its normalization.
inline Quat step_quat_tangent(const Quat& q, const Quat& q_next,
                              double q_pre_norm, const Vec3& dw, double dt) {
  const Quat dq_pre_raw = pure_quat(dw) * q;
  const Quat dq_pre{0.5 * dt * dq_pre_raw.w, 0.5 * dt * dq_pre_raw.x,
                    0.5 * dt * dq_pre_raw.y, 0.5 * dt * dq_pre_raw.z};
  const double proj = dot(q_next, dq_pre);
  return {(dq_pre.w - proj * q_next.w) / q_pre_norm,
          (dq_pre.x - proj * q_next.x) / q_pre_norm,
          (dq_pre.y - proj * q_next.y) / q_pre_norm,
          (dq_pre.z - proj * q_next.z) / q_pre_norm};
}

}  // namespace detail

/// Analytic gradient of step_loss(predict_step(states), truth) with respect
/// to every parameter, propagated forward through force generation,
/// acceleration and the semi-implicit update. Matches central finite
/// differences to ~1e-8 relative on smooth points.
///
/// Throws NonSmoothPointError if a tension-only spring sits exactly at the
/// clamp boundary (the force law has no derivative there); springs strictly
/// inside the clamped region contribute zero derivative.
inline ParamGradient param_gradient(const Topology& topo,
                                    const ParamSet& params,
                                    std::span<const RodState> states,
                                    std::span<const Vec3> commands,
                                    std::span<const RodState> truth) {
  const std::size_t n = topo.rods.size();
  const std::size_t G = params.springs.size();
  const std::size_t R = params.rods.size();
  const std::size_t C = params.control_scale.size();
  const std::size_t P = 3 * G + 2 * R + C;
  const double dt = topo.dt;

  // Forward pass, same code path as predict_step.
  const std::vector<RodEndForces> forces =
      all_spring_forces(topo, params.springs, states);
  const std::vector<RodWrench> wrenches =
      system_wrenches(topo, params, states, forces, commands);
  std::vector<Accel> acc(n);
  std::vector<RodState> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RodParams& rp = params.rod(i);
    acc[i] = {wrenches[i].force / rp.M + topo.gravity,
              wrenches[i].torque / rp.I};
    pred[i] = step(states[i], acc[i], dt);
  }

  std::vector<Vec3> r_w(n);
  for (std::size_t i = 0; i < n; ++i)
    r_w[i] = half_length_vector(states[i], topo.rods[i]);

  // Tangent endpoint forces per spring parameter, then tangent accelerations
  // per parameter.
  std::vector<std::vector<RodEndForces>> dforce(
      3 * G, std::vector<RodEndForces>(n));
  for (std::size_t s = 0; s < topo.springs.size(); ++s) {
    const SpringDef& sd = topo.springs[s];
    const auto [pa, va] = resolve_endpoint(topo, sd.a, states);
    const auto [pb, vb] = resolve_endpoint(topo, sd.b, states);
    const SpringMeasurement m = measure(pa, va, pb, vb, static_cast<int>(s));
    const SpringParams& sp = params.springs[static_cast<std::size_t>(sd.group)];
    const double raw = sp.K * (m.ell - sp.L0) + sp.c * m.sdot;
    double df_dK = m.ell - sp.L0;
    double df_dc = m.sdot;
    double df_dL0 = -sp.K;
    if (topo.cable_mode) {
      if (raw == 0.0)
        throw NonSmoothPointError(
            static_cast<int>(s),
            "spring " + std::to_string(s) +
                " is exactly at the cable clamp boundary; gradient undefined");
      if (raw < 0.0) df_dK = df_dc = df_dL0 = 0.0;
    }
    const std::size_t base = 3 * static_cast<std::size_t>(sd.group);
    const double dfs[3] = {df_dK, df_dc, df_dL0};
    for (int j = 0; j < 3; ++j) {
      const Vec3 dfa = dfs[j] * m.u;
      detail::accumulate_endpoint_force(sd.a, dfa, dforce[base + j]);
      detail::accumulate_endpoint_force(sd.b, -dfa, dforce[base + j]);
    }
  }

  std::vector<std::vector<Accel>> dacc(P, std::vector<Accel>(n));
  for (std::size_t p = 0; p < 3 * G; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      const RodParams& rp = params.rod(i);
      const Vec3 df = dforce[p][i].plus + dforce[p][i].minus;
      const Vec3 dtau = cross(r_w[i], dforce[p][i].plus) -
                        cross(r_w[i], dforce[p][i].minus);
      dacc[p][i] = {df / rp.M, dtau / rp.I};
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t pM = 3 * G + 2 * r;
    for (std::size_t i = 0; i < n; ++i) {
      if (R != 1 && i != r) continue;
      const RodParams& rp = params.rod(i);
      dacc[pM][i].a = -1.0 / (rp.M * rp.M) * wrenches[i].force;
      dacc[pM + 1][i].alpha = -1.0 / (rp.I * rp.I) * wrenches[i].torque;
    }
  }
  for (std::size_t k = 0; k < topo.controls.size(); ++k) {
    const ControlDef& ctl = topo.controls[k];
    const Vec3 u = k < commands.size() ? commands[k] : Vec3{};
    const auto i = static_cast<std::size_t>(ctl.rod_index);
    const RodParams& rp = params.rod(i);
    const Vec3 arm_w = rotate(states[i].q, topo.control_arm_body(ctl));
    const std::size_t p = 3 * G + 2 * R + static_cast<std::size_t>(ctl.group);
    dacc[p][i].a += u / rp.M;
    dacc[p][i].alpha += cross(arm_w, u) / rp.I;
  }

  // Push tangents through the integrator and the loss.
  std::vector<double> grad_flat(P, 0.0);
  const double scale = 2.0 / (13.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    // Un-normalized updated quaternion, needed by the tangent of normalize.
    const Quat dq_fwd = pure_quat(pred[i].w) * states[i].q;
    const Quat q_pre{states[i].q.w + 0.5 * dt * dq_fwd.w,
                     states[i].q.x + 0.5 * dt * dq_fwd.x,
                     states[i].q.y + 0.5 * dt * dq_fwd.y,
                     states[i].q.z + 0.5 * dt * dq_fwd.z};
    const double q_pre_norm = norm(q_pre);
    const Vec3 ep = pred[i].p - truth[i].p;
    const Vec3 ev = pred[i].v - truth[i].v;
    const Vec3 ew = pred[i].w - truth[i].w;
    const Quat eq{pred[i].q.w - truth[i].q.w, pred[i].q.x - truth[i].q.x,
                  pred[i].q.y - truth[i].q.y, pred[i].q.z - truth[i].q.z};
    for (std::size_t p = 0; p < P; ++p) {
      const Vec3 dv = dt * dacc[p][i].a;
      const Vec3 dpos = dt * dv;
      const Vec3 dw = dt * dacc[p][i].alpha;
      if (dv.x == 0.0 && dv.y == 0.0 && dv.z == 0.0 && dw.x == 0.0 &&
          dw.y == 0.0 && dw.z == 0.0)
        continue;
      const Quat dq =
          detail::step_quat_tangent(states[i].q, pred[i].q, q_pre_norm, dw, dt);
      grad_flat[p] += scale * (dot(ep, dpos) + dot(ev, dv) + dot(ew, dw) +
                               dot(eq, dq));
    }
  }

  ParamGradient g;
  g.springs.resize(G);
  g.rods.resize(R);
  g.control_scale.resize(C);
  std::size_t j = 0;
  for (std::size_t gg = 0; gg < G; ++gg) {
    g.springs[gg].K = grad_flat[j++];
    g.springs[gg].c = grad_flat[j++];
    g.springs[gg].L0 = grad_flat[j++];
  }
  for (std::size_t r = 0; r < R; ++r) {
    g.rods[r].M = grad_flat[j++];
    g.rods[r].I = grad_flat[j++];
  }
  for (std::size_t k = 0; k < C; ++k) g.control_scale[k] = grad_flat[j++];
  return g;
}

}  // namespace springrod
