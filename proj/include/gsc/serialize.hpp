#pragma once

// Versioned JSON documents and CSV tables for command outputs.

#include <gsc/bootstrap.hpp>
#include <gsc/estimate.hpp>
#include <gsc/experiments.hpp>
#include <gsc/gof.hpp>
#include <gsc/inference.hpp>
#include <gsc/simdata.hpp>

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace gsc {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

Json vector_json(const Vector& v);
Json matrix_json(const Matrix& m);  // list of rows
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const FitResult& fit, const std::string& model_kind);
Json to_json(const ConfidenceSet& set);
Json to_json(const EffDimReport& report);
Json to_json(const TestReport& report);
Json to_json(const Process& process);
Process process_from_json(const Json& j);

/// Adds "schema_version" and "kind" in front of a document body.
Json document(const std::string& kind, const Json& body);

void write_coverage_csv(std::ostream& out, const std::vector<CoverageCell>& cells);
void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows);
void write_test_csv(std::ostream& out, const TestReport& report);
void write_effdim_error_csv(std::ostream& out, const std::vector<EffdimErrorRow>& rows);
void write_confset_shape_csv(std::ostream& out, const std::vector<ConfsetShape>& shapes);

/// Writes `text` to `path`, or to stdout when path is empty or "-".
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gsc
