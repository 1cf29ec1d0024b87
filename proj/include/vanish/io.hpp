#pragma once

#include "vanish/basis.hpp"
#include "vanish/pipeline.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vanish {

constexpr int kSchemaVersion = 1;

/// basis.json: run parameters, training points, the per-degree recipe, and per polynomial
/// its extent, eigenvalue, tracked and exact coefficient norms and exact coefficient vector
/// (cumulative degree-lexicographic order).
nlohmann::json basis_to_json(const ConstructionResult& result);

/// Rebuilds a run from basis.json. Evaluations and coefficients are recomputed from the
/// recipe, so the loaded result carries exact coefficients even when the run was truncated.
ConstructionResult basis_from_json(const nlohmann::json& doc);

void write_basis_json(const ConstructionResult& result, const std::string& path);
ConstructionResult load_basis_json(const std::string& path);

/// One row per degree and kind (F or G). Absent statistics are left empty.
void write_diagnostics_csv(const DegreeDiagnostics& diagnostics, std::ostream& out);
void write_diagnostics_csv(const DegreeDiagnostics& diagnostics, const std::string& path);

/// One row per theta.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

nlohmann::json diagnostics_to_json(const DegreeDiagnostics& diagnostics);
nlohmann::json classify_to_json(const ClassifyReport& report);

void write_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json read_json(const std::string& path);

} // namespace vanish
