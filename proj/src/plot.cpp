#include "ganbench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ganbench/io.hpp"

namespace ganbench::plot {

void save_sample_grid(const std::string& path, const core::Tensor<float>& images, int rows,
                      int cols) {
  if (images.ndim() != 4) throw std::invalid_argument("save_sample_grid: expected [N,C,H,W]");
  const int n = static_cast<int>(images.dim(0));
  const int c = static_cast<int>(images.dim(1));
  const int h = static_cast<int>(images.dim(2));
  const int w = static_cast<int>(images.dim(3));
  const int sep = 2;
  const int gw = cols * w + (cols + 1) * sep;
  const int gh = rows * h + (rows + 1) * sep;
  const int out_c = c == 1 ? 1 : 3;
  std::vector<uint8_t> canvas(static_cast<size_t>(gw) * gh * out_c, 32);  // dark separators
  auto to8 = [](float v) {
    const float u = (v + 1.0f) * 0.5f;
    return static_cast<uint8_t>(std::max(0.0f, std::min(255.0f, u * 255.0f + 0.5f)));
  };
  for (int r = 0; r < rows; ++r)
    for (int col = 0; col < cols; ++col) {
      const int idx = r * cols + col;
      if (idx >= n) break;
      const int oy = sep + r * (h + sep);
      const int ox = sep + col * (w + sep);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int ch = 0; ch < out_c; ++ch)
            canvas[static_cast<size_t>(((oy + y) * gw + ox + x) * out_c + ch)] =
                to8(images[((static_cast<int64_t>(idx) * c + std::min(ch, c - 1)) * h + y) * w + x]);
    }
  if (out_c == 1)
    io::write_png_gray(path, canvas.data(), gw, gh);
  else
    io::write_png_rgb(path, canvas.data(), gw, gh);
}

namespace {

void splat(std::vector<uint8_t>& px, int canvas, int x, int y, uint8_t r, uint8_t g, uint8_t b) {
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const int xx = x + dx, yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= canvas || yy >= canvas) continue;
      uint8_t* p = px.data() + (static_cast<size_t>(yy) * canvas + xx) * 3;
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
}

}  // namespace

void save_scatter(const std::string& path, const core::Tensor<double>& real,
                  const core::Tensor<double>& generated, int axis_x, int axis_y, int canvas) {
  if (real.ndim() != 2 || generated.ndim() != 2)
    throw std::invalid_argument("save_scatter: expected [N,d] tensors");
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  auto scan = [&](const core::Tensor<double>& t) {
    for (int64_t i = 0; i < t.dim(0); ++i) {
      lo_x = std::min(lo_x, t.at2(i, axis_x));
      hi_x = std::max(hi_x, t.at2(i, axis_x));
      lo_y = std::min(lo_y, t.at2(i, axis_y));
      hi_y = std::max(hi_y, t.at2(i, axis_y));
    }
  };
  scan(real);
  scan(generated);
  if (!(hi_x > lo_x)) hi_x = lo_x + 1;
  if (!(hi_y > lo_y)) hi_y = lo_y + 1;
  const double mx = 0.05 * (hi_x - lo_x), my = 0.05 * (hi_y - lo_y);
  lo_x -= mx;
  hi_x += mx;
  lo_y -= my;
  hi_y += my;

  std::vector<uint8_t> px(static_cast<size_t>(canvas) * canvas * 3, 255);
  auto draw = [&](const core::Tensor<double>& t, uint8_t r, uint8_t g, uint8_t b) {
    for (int64_t i = 0; i < t.dim(0); ++i) {
      const int x = static_cast<int>((t.at2(i, axis_x) - lo_x) / (hi_x - lo_x) * (canvas - 2));
      // image y grows downward; flip so larger data y plots higher
      const int y = static_cast<int>((hi_y - t.at2(i, axis_y)) / (hi_y - lo_y) * (canvas - 2));
      splat(px, canvas, x, y, r, g, b);
    }
  };
  draw(real, 176, 176, 176);
  draw(generated, 205, 50, 50);
  io::write_png_rgb(path, px.data(), canvas, canvas);
}

}  // namespace ganbench::plot
