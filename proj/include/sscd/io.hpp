#pragma once

#include <filesystem>
#include <string>

#include "sscd/chardata.hpp"
#include "sscd/constraint.hpp"

#include <nlohmann/json_fwd.hpp>

namespace sscd {

// Self-describing binary grid format: magic "SGRD", u32 version, u32 n_theta,
// n_phi, rank, n_components; payload little-endian float64, component-major,
// theta-major within a component.
void write_field_binary(const std::filesystem::path& p, const SphereGrid& g, int rank,
                        const std::vector<const ArrayXXd*>& comps);
struct LoadedField {
  int n_theta = 0, n_phi = 0, rank = 0;
  std::vector<ArrayXXd> comps;
};
LoadedField read_field_binary(const std::filesystem::path& p);

void write_field_binary(const std::filesystem::path& p, const ScalarField& f);
void write_field_binary(const std::filesystem::path& p, const PairField& f, int rank);
void write_field_csv(const std::filesystem::path& p, const SphereGrid& g,
                     const std::vector<const ArrayXXd*>& comps);

// RegularTuple as binary fields + JSON metadata.
void save_tuple(const std::filesystem::path& dir, const RegularTuple& t);
RegularTuple load_tuple(const std::filesystem::path& dir, GridPtr grid);

// CharDataBundle as a directory: manifest + per-field binaries.
void save_chardata(const std::filesystem::path& dir, const CharDataBundle& b,
                   const SphereGrid& g);

}  // namespace sscd
