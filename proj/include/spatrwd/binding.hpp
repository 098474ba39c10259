// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace spatrwd {

// scores[i][j] >= 0 is the pair score of entity i with detection j.
// Returns, per entity, the bound detection index. The assignment binds
// min(rows, cols) entities (maximum cardinality) and, among those, maximizes
// the sum of pair scores. Deterministic for a given matrix.
using Assignment = std::vector<std::optional<std::size_t>>;
Assignment MaxWeightAssignment(const std::vector<std::vector<double>>& scores);

double AssignmentValue(const std::vector<std::vector<double>>& scores, const Assignment& assignment);

}  // namespace spatrwd
