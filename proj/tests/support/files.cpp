#include "files.hpp"

#include "fixtures.hpp"

#include "lattice/io.hpp"

#include <random>

namespace fixtures {

std::vector<std::pair<std::string, lattice::UnitCell>> named_cells() {
  return {{"sc", sc()},
          {"bcc", bcc()},
          {"fcc", fcc()},
          {"octet", octet()},
          {"pyramid", pyramid()},
          {"repeated_nodes", repeated_nodes_cell()},
          {"isolated_node", isolated_node_cell()},
          {"isolated_strut", isolated_strut_cell()},
          {"isolated_subpart", isolated_subpart_cell()},
          {"not_periodic", not_periodic_cell()}};
}

std::filesystem::path scratch_dir(const std::string& name) {
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() / (name + "_" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_lattice_files(const std::filesystem::path& dir) {
  for (const auto& [name, cell] : named_cells()) {
    lattice::io::LatticeFile f;
    f.cell = cell;
    lattice::io::save(dir / (name + ".json"), f);
  }
}

}  // namespace fixtures
