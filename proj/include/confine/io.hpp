#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "confine/particle_state.hpp"

namespace confine {

/// CSV snapshot: header x1,...,x<dim>,mass then one row per particle.
void write_snapshot_csv(std::ostream& os, const ParticleState& state);
ParticleState read_snapshot_csv(std::istream& is);

/// {"dim", "n", "time", "kernel", "positions": [[...]], "masses": [...]}
nlohmann::json snapshot_to_json(const ParticleState& state, const std::string& kernel_name);
ParticleState snapshot_from_json(const nlohmann::json& j);

/// Reads a snapshot from .json or .csv, chosen by extension. The kernel
/// name is filled from JSON metadata when present.
ParticleState load_snapshot(const std::string& path, std::string* kernel_name = nullptr);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace confine
