/*
 * Copyright 2026 The Semivalue Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef SEMIVALUE_SVG_PLOT_H_
#define SEMIVALUE_SVG_PLOT_H_

#include <string>
#include <vector>

#include "semivalue/core.h"
#include "semivalue/evaluation.h"

// Minimal static SVG charts for the figure recipes.
namespace semivalue {

// Mean lines with shaded bands, x = 0..len-1.
std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<CurveBand>& bands);

// Square cells coloured black where flagged, grey where tied, white otherwise.
// `flags` is row-major over an n×n grid with x₁ varying slowest.
std::string BinaryGridSvg(const std::string& title, int n, const std::vector<int>& flags);

}  // namespace semivalue

#endif  // SEMIVALUE_SVG_PLOT_H_
