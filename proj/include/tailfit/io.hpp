// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailfit/evaluation.hpp"

namespace tailfit {

/// Shortest round-trip decimal form of v (std::to_chars), so identical
/// doubles always serialize to identical bytes.
std::string format_double(double v);

/// Reads one value per line; blank lines and lines starting with '#' are
/// skipped. Throws std::runtime_error with the offending line number on
/// malformed input.
std::vector<double> read_values_csv(const std::string& path);

void write_values_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<std::string>& comments = {});

/// Fit serialization (JSON, schema_version 1): method, shape, scale, n,
/// optional seed, diagnostics. read_fit_json validates the schema and the
/// parameter domain.
std::string fit_to_json(const FitResult& fit,
                        std::optional<std::uint64_t> seed = std::nullopt);
void write_fit_json(const std::string& path, const FitResult& fit,
                    std::optional<std::uint64_t> seed = std::nullopt);
FitResult read_fit_json(const std::string& path);

/// CSV emitters. Columns are described in '#' comment lines; data rows
/// contain values only, so row counts match the requested grid sizes.
std::string qq_to_csv(const QqReport& report);
std::string pdf_to_csv(const std::vector<std::pair<double, double>>& curve);
std::string losses_to_csv(const std::vector<StepLosses>& losses);
std::string sweep_cells_to_csv(const std::vector<SweepCell>& cells);
std::string sweep_summary_to_csv(const std::vector<SweepAggregate>& aggregates);

/// Standalone q-q scatter with the identity diagonal and the fitted line.
std::string qq_to_svg(const QqReport& report);

/// Writes content atomically enough for our purposes: the file appears
/// only after the full string is assembled.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace tailfit
