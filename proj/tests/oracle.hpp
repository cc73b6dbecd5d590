#pragma once

#include <travshacl/graph.hpp>
#include <travshacl/schema.hpp>
#include <travshacl/validation.hpp>

#include <vector>

namespace oracle {

// Naive minimal-model verdicts of every targeted (entity, shape) pair: every
// graph term is evaluated against every shape by counting objects, strata are
// computed by relaxation over edge signs, and each stratum iterates upward
// from all-false. Shares nothing with the engine beyond the data types.
// Class targets only.
std::vector<travshacl::VerdictRecord> minimal_model(const travshacl::ShapeSchema& schema,
                                                    const travshacl::Graph& graph);

}  // namespace oracle
