#pragma once

// File formats: point and matrix CSVs, family and cost spec strings, JSON
// reports and SVG scatter plots.

#include <string>
#include <vector>

#include "json.hpp"
#include "walign/alignment.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"

namespace walign {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

// Comma-separated numbers, one record per line. The first line is taken as a
// header when any of its fields is not a number. Blank lines are skipped.
CsvTable read_csv(const std::string& path);

// Points one per row; a final header column named "weight" holds weights.
DiscreteMeasure read_measure_csv(const std::string& path);

// "sq-euclidean" | "power:<p>" | "inner:<scale>"
CostSpec parse_cost_spec(const std::string& spec);

// "rotations2d:<l>" | "matrices:<path>" | "igw:<path>". For matrices, each
// row is a row-major out_dim x in_dim matrix with an optional trailing
// penalty; for igw, each row is a row-major in_dim x out_dim matrix A.
TransformFamily parse_family_spec(const std::string& spec, int in_dim, int out_dim);

// One penalty per line or all on one line.
std::vector<double> read_penalties(const std::string& path);

void write_text(const std::string& path, const std::string& content);

// JSON text with every floating-point number printed as %.17g; non-finite
// numbers become null.
std::string dump_json(const nlohmann::json& value, int indent = 2);

std::string format_double(double v);

nlohmann::json report_json(const AlignmentReport& report, const TransformFamily& family);

std::string plan_csv(const TransportPlan& plan);
std::string potentials_csv(const PotentialPair& potentials);
// k, label, angle (empty when none), I, per-theta objective, Delta, G
std::string curve_csv(const AlignmentReport& report, const TransformFamily& family);

// 800 x 800 scatter: targets as outline circles, pushed-forward sources as
// filled circles. One-dimensional points are drawn on a horizontal line.
std::string svg_scatter(const DiscreteMeasure& targets, const DiscreteMeasure& pushed);

}  // namespace walign
