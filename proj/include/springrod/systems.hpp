#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "springrod/accel_gen.hpp"
#include "springrod/params.hpp"

namespace springrod {

/// A topology together with the nominal states it was laid out in.
struct SystemSetup {
  Topology topology;
  std::vector<RodState> nominal_states;
};

/// Six-strut tensegrity icosahedron: 6 rods in 3 orthogonal parallel pairs,
/// 24 cables, every rod end holding 4 cables. Node coordinates are the
/// regular-icosahedron layout (golden-rectangle construction) scaled so the
/// struts have the requested length; the 24 cables are the icosahedron edges
/// minus the 6 edges that pair up parallel struts.
inline SystemSetup make_icosahedron(double rod_length = 1.04,
                                    double dt = 1e-3,
                                    Vec3 gravity = {0.0, 0.0, -9.81},
                                    bool with_controls = false) {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double k = rod_length / (2.0 * phi);
  const double a = phi * k;

  SystemSetup sys;
  Topology& topo = sys.topology;
  topo.dt = dt;
  topo.gravity = gravity;
  topo.rods.assign(6, RodGeometry{rod_length, {0.0, 0.0, 1.0}});

  // Rod i: COM position and the world direction of its body +z axis.
  const Vec3 centers[6] = {{0, 0, k},  {0, 0, -k}, {k, 0, 0},
                           {-k, 0, 0}, {0, k, 0},  {0, -k, 0}};
  const Vec3 axes[6] = {{1, 0, 0}, {1, 0, 0}, {0, 1, 0},
                        {0, 1, 0}, {0, 0, 1}, {0, 0, 1}};
  const double s = std::sqrt(0.5);
  const Quat z_to_x{s, 0.0, s, 0.0};   // +90 deg about y
  const Quat z_to_y{s, -s, 0.0, 0.0};  // -90 deg about x
  const Quat quats[6] = {z_to_x, z_to_x, z_to_y, z_to_y, Quat{}, Quat{}};
  for (int i = 0; i < 6; ++i)
    sys.nominal_states.push_back({centers[i], Vec3{}, quats[i], Vec3{}});

  // Endpoint positions in nominal pose, indexed 2*rod + (0 plus, 1 minus).
  std::vector<Vec3> nodes(12);
  for (int i = 0; i < 6; ++i) {
    nodes[static_cast<std::size_t>(2 * i)] = centers[i] + a * axes[i];
    nodes[static_cast<std::size_t>(2 * i + 1)] = centers[i] - a * axes[i];
  }
  // Cables: node pairs at icosahedron edge length 2k, except the 6 edges
  // joining a strut to its parallel partner (rods 0-1, 2-3, 4-5).
  for (int m = 0; m < 12; ++m) {
    for (int n = m + 1; n < 12; ++n) {
      const int rod_m = m / 2, rod_n = n / 2;
      if (rod_m / 2 == rod_n / 2) continue;  // same parallel pair (or same rod)
      const double d = norm(nodes[static_cast<std::size_t>(m)] -
                            nodes[static_cast<std::size_t>(n)]);
      if (std::abs(d - 2.0 * k) > 1e-9 * rod_length) continue;
      topo.springs.push_back(
          {EndpointRef::rod_end(rod_m, m % 2 == 0 ? End::Plus : End::Minus),
           EndpointRef::rod_end(rod_n, n % 2 == 0 ? End::Plus : End::Minus),
           0});
    }
  }
  if (with_controls)
    for (int i = 0; i < 6; ++i)
      topo.controls.push_back({i, std::nullopt, 0});
  return sys;
}

/// Ground-truth parameters used by the bundled icosahedron oracle. Inertia
/// is the uniform thin-rod value, so identified I/M can be cross-checked
/// against L^2/12.
inline ParamSet icosahedron_true_params(double rod_length = 1.04,
                                        bool with_controls = false) {
  ParamSet p;
  p.springs = {{120.0, 1.5, 0.637}};
  p.rods = {{1.2, thin_rod_inertia(1.2, rod_length)}};
  if (with_controls) p.control_scale = {2.5};
  return p;
}

/// The basic element: one rod suspended from two world anchors by one spring
/// per end.
inline SystemSetup make_simple_element(double dt = 1e-3,
                                       Vec3 gravity = {0.0, 0.0, -9.81}) {
  SystemSetup sys;
  Topology& topo = sys.topology;
  topo.dt = dt;
  topo.gravity = gravity;
  topo.rods.assign(1, RodGeometry{1.0, {0.0, 0.0, 1.0}});
  topo.springs.push_back({EndpointRef::anchor({0.6, 0.0, 1.0}),
                          EndpointRef::rod_end(0, End::Plus), 0});
  topo.springs.push_back({EndpointRef::anchor({-0.6, 0.0, 1.0}),
                          EndpointRef::rod_end(0, End::Minus), 0});
  const double s = std::sqrt(0.5);
  sys.nominal_states.push_back(
      {Vec3{}, Vec3{}, Quat{s, 0.0, s, 0.0}, Vec3{}});  // rod along +x
  return sys;
}

inline ParamSet simple_element_true_params() {
  ParamSet p;
  p.springs = {{80.0, 0.6, 0.9}};
  p.rods = {{0.7, thin_rod_inertia(0.7, 1.0)}};
  return p;
}

}  // namespace springrod
