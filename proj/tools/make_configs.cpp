// Regenerates the bundled configs under configs/ from the builders in
// springrod/systems.hpp. Run from the repository root:
//   build/tools/make_configs configs

#include <filesystem>
#include <iostream>

#include "springrod/io/json.hpp"
#include "springrod/systems.hpp"

int main(int argc, char** argv) {
  using namespace springrod;
  const std::filesystem::path dir = argc > 1 ? argv[1] : "configs";
  std::filesystem::create_directories(dir);

  const SystemSetup ico = make_icosahedron();
  io::save_json_file((dir / "icosahedron.json").string(),
                     io::topology_to_json(ico.topology, ico.nominal_states));
  io::save_json_file((dir / "icosahedron_true_params.json").string(),
                     io::params_to_json(icosahedron_true_params()));

  const SystemSetup ico_ctl = make_icosahedron(1.04, 1e-3, {0, 0, -9.81},
                                               /*with_controls=*/true);
  io::save_json_file(
      (dir / "icosahedron_controls.json").string(),
      io::topology_to_json(ico_ctl.topology, ico_ctl.nominal_states));
  io::save_json_file(
      (dir / "icosahedron_controls_true_params.json").string(),
      io::params_to_json(icosahedron_true_params(1.04, /*with_controls=*/true)));

  const SystemSetup simple = make_simple_element();
  io::save_json_file((dir / "simple_element.json").string(),
                     io::topology_to_json(simple.topology, simple.nominal_states));
  io::save_json_file((dir / "simple_element_true_params.json").string(),
                     io::params_to_json(simple_element_true_params()));

  std::cout << "configs written to " << dir << "\n";
  return 0;
}
