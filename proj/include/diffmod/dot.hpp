#pragma once

#include <string>
#include <utility>
#include <vector>

#include "diffmod/ark.hpp"
#include "diffmod/neuro.hpp"

namespace diffmod::dot {

/// Network drawing in the DOT language. With a CFN, only retained edges are
/// drawn, colored by module (summer red, winter blue, common green); bias-node
/// out-edges are thin. Modulatory nodes get a heavy border, point sources are
/// purple points, and `attributes` become graph attributes.
std::string to_dot(const neuro::Genome& genome, const ark::CoreFunctionalNetwork* cfn,
                   const std::vector<std::pair<std::string, std::string>>& attributes = {});

}  // namespace diffmod::dot
