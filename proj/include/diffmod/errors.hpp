#pragma once

#include <stdexcept>
#include <string>

namespace diffmod {

/// A network, log or vector violates a structural invariant (backward or
/// duplicate edges, wrong layer sizes, mismatched lengths).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration or unusable paths, raised before compute.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ARK enumeration would exceed the knockout cap at a node.
class CapacityError : public std::runtime_error {
public:
    CapacityError(int node, int in_degree)
        : std::runtime_error("knockout table for node " + std::to_string(node) + " needs 2^" +
                             std::to_string(in_degree) + " rows, above the cap"),
          node_(node) {}
    int node() const { return node_; }

private:
    int node_;
};

/// No knockout combination meets the error threshold.
class SelectionError : public std::runtime_error {
public:
    SelectionError(int node, double threshold)
        : std::runtime_error("no knockout combination of node " + std::to_string(node) +
                             " has SER <= " + std::to_string(threshold)),
          node_(node) {}
    int node() const { return node_; }

private:
    int node_;
};

}  // namespace diffmod
