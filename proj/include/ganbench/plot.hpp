#pragma once

#include <string>

#include "ganbench/core/tensor.hpp"

namespace ganbench::plot {

// Tile up to rows*cols images [N,C,H,W] into one PNG with 2px separators.
void save_sample_grid(const std::string& path, const core::Tensor<float>& images, int rows = 8,
                      int cols = 8);

// Scatter plot of real (gray) vs generated (red) points on a shared frame.
// axis_x/axis_y select the projection for 3D data.
void save_scatter(const std::string& path, const core::Tensor<double>& real,
                  const core::Tensor<double>& generated, int axis_x = 0, int axis_y = 1,
                  int canvas = 560);

}  // namespace ganbench::plot
