#pragma once

#include <string>
#include <vector>

#include "mcausal/estimands.hpp"
#include "mcausal/geometry.hpp"
#include "mcausal/linalg.hpp"

namespace mcausal {

// Landmark rows: 2K numeric columns x1,y1,...,xK,yK, one shape per row, K
// inferred from the header. A leading "id" column is optional; without one,
// rows are identified by their 1-based position.
struct LandmarkTable {
    std::vector<std::string> ids;
    std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>> shapes;
    int landmarks = 0;
};

LandmarkTable read_landmarks_csv(const std::string& path);

// Unit rows: id, z, then covariate columns. Numeric columns pass through;
// non-numeric columns are one-hot encoded (first level dropped, levels in
// lexicographic order).
struct UnitTable {
    std::vector<std::string> ids;
    std::vector<int> z;
    Mat covariates;
    std::vector<std::string> covariate_names;  // after encoding
};

UnitTable read_units_csv(const std::string& path);

// Joins the two tables by id (landmark table without ids joins by position)
// and builds preshape outcomes. Throws IngestError listing offending ids on
// any mismatch.
std::vector<Unit> assemble_units(const UnitTable& units, const LandmarkTable& outcomes);

}  // namespace mcausal
