#pragma once

#include <string>
#include <string_view>

#include "diffmod/neuro.hpp"
#include "json.hpp"

namespace diffmod::neuro {

/// Structured-text genome document:
///   {"mode": "standard"|"diffusion",
///    "nodes": [[id, layer, x, y, bias, modul], ...],
///    "connections": [[source, target, weight], ...],
///    "point_sources": [[x, y, radius, sigma], ...]}
/// Reals are written in shortest round-trip decimal form, so parsing restores
/// every value bit for bit.
nlohmann::json genome_to_json(const Genome& genome);
Genome genome_from_json(const nlohmann::json& doc);

std::string serialize_genome(const Genome& genome);
Genome parse_genome(std::string_view text);

}  // namespace diffmod::neuro
