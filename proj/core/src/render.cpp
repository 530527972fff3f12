#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "hateclf/error.hpp"
#include "hateclf/eval.hpp"

namespace hateclf {

namespace fs = std::filesystem;

namespace {

// 5x7 bitmap glyphs, one byte per row, bit 4 leftmost.
using Glyph = std::array<std::uint8_t, 7>;

Glyph glyph(char c) {
  static const Glyph digits[10] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
  static const Glyph letters[26] = {
      {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
      {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}};
  if (c >= '0' && c <= '9') return digits[c - '0'];
  const int u = std::toupper(static_cast<unsigned char>(c));
  if (u >= 'A' && u <= 'Z') return letters[u - 'A'];
  switch (c) {
    case ' ': return {0, 0, 0, 0, 0, 0, 0};
    case '-': return {0, 0, 0, 0x1F, 0, 0, 0};
    case '_': return {0, 0, 0, 0, 0, 0, 0x1F};
    case '.': return {0, 0, 0, 0, 0, 0x0C, 0x0C};
    default: return {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04};
  }
}

struct Rgb {
  std::uint8_t r, g, b;
};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

  int width() const { return w_; }
  int height() const { return h_; }
  const std::uint8_t* row(int y) const { return px_.data() + static_cast<std::size_t>(y) * w_ * 3; }

  void fill(int x0, int y0, int w, int h, Rgb c) {
    for (int y = std::max(0, y0); y < std::min(h_, y0 + h); ++y) {
      for (int x = std::max(0, x0); x < std::min(w_, x0 + w); ++x) set(x, y, c);
    }
  }

  static int text_width(const std::string& s, int scale) {
    return s.empty() ? 0 : static_cast<int>(s.size()) * 6 * scale - scale;
  }

  // (cx, cy) is the centre of the text box; vertical text runs bottom to top.
  void text(const std::string& s, int cx, int cy, int scale, Rgb c, bool vertical = false) {
    const int tw = text_width(s, scale);
    const int th = 7 * scale;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Glyph g = glyph(s[i]);
      for (int gy = 0; gy < 7; ++gy) {
        for (int gx = 0; gx < 5; ++gx) {
          if (!(g[static_cast<std::size_t>(gy)] & (0x10 >> gx))) continue;
          const int u = static_cast<int>(i) * 6 * scale + gx * scale;  // along the text
          const int v = gy * scale;                                     // across the text
          if (vertical) {
            fill(cx - th / 2 + v, cy + tw / 2 - u - scale, scale, scale, c);
          } else {
            fill(cx - tw / 2 + u, cy - th / 2 + v, scale, scale, c);
          }
        }
      }
    }
  }

 private:
  void set(int x, int y, Rgb c) {
    auto* p = px_.data() + (static_cast<std::size_t>(y) * w_ + x) * 3;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  int w_;
  int h_;
  std::vector<std::uint8_t> px_;
};

struct Layout {
  int cell = 72;
  int left = 0;
  int top = 48;
  int k = 0;
  int width = 0;
  int height = 0;
};

Layout layout_for(const ConfusionMatrix& cm) {
  Layout l;
  l.k = static_cast<int>(cm.labels.size());
  int label_w = 0;
  for (const auto& s : cm.labels) label_w = std::max(label_w, Canvas::text_width(s, 2));
  l.left = 40 + label_w + 16;
  l.width = l.left + l.k * l.cell + 24;
  l.height = l.top + l.k * l.cell + 64;
  return l;
}

std::size_t max_count(const ConfusionMatrix& cm) {
  std::size_t m = 0;
  for (const auto& row : cm.counts) {
    for (auto c : row) m = std::max(m, c);
  }
  return m;
}

Rgb shade(double t) {
  // white -> steel blue
  const auto mix = [t](int a, int b) {
    return static_cast<std::uint8_t>(a + (b - a) * t + 0.5);
  };
  return {mix(247, 33), mix(251, 102), mix(255, 172)};
}

double intensity(const ConfusionMatrix& cm, std::size_t i, std::size_t j, std::size_t mx) {
  return mx == 0 ? 0.0 : static_cast<double>(cm.counts[i][j]) / static_cast<double>(mx);
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const ConfusionMatrix& cm) {
  const Layout l = layout_for(cm);
  const std::size_t mx = max_count(cm);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << l.width << "\" height=\""
    << l.height << "\" font-family=\"sans-serif\" font-size=\"14\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (int i = 0; i < l.k; ++i) {
    for (int j = 0; j < l.k; ++j) {
      const double t = intensity(cm, i, j, mx);
      const int x = l.left + j * l.cell;
      const int y = l.top + i * l.cell;
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << l.cell << "\" height=\""
        << l.cell << "\" fill=\"" << hex(shade(t)) << "\" stroke=\"#808080\"/>\n";
      s << "<text x=\"" << x + l.cell / 2 << "\" y=\"" << y + l.cell / 2
        << "\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\""
        << (t > 0.5 ? "#ffffff" : "#000000") << "\">" << cm.counts[i][j] << "</text>\n";
    }
  }
  for (int i = 0; i < l.k; ++i) {
    const std::string name = xml_escape(cm.labels[static_cast<std::size_t>(i)]);
    s << "<text class=\"ytick\" x=\"" << l.left - 8 << "\" y=\"" << l.top + i * l.cell + l.cell / 2
      << "\" text-anchor=\"end\" dominant-baseline=\"central\">" << name << "</text>\n";
    s << "<text class=\"xtick\" x=\"" << l.left + i * l.cell + l.cell / 2 << "\" y=\""
      << l.top + l.k * l.cell + 20 << "\" text-anchor=\"middle\">" << name << "</text>\n";
  }
  s << "<text x=\"" << l.left + l.k * l.cell / 2 << "\" y=\"" << l.top + l.k * l.cell + 48
    << "\" text-anchor=\"middle\">predicted</text>\n";
  s << "<text x=\"16\" y=\"" << l.top + l.k * l.cell / 2 << "\" text-anchor=\"middle\" "
    << "transform=\"rotate(-90 16 " << l.top + l.k * l.cell / 2 << ")\">true</text>\n";
  s << "<text x=\"" << l.left + l.k * l.cell / 2
    << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">confusion matrix</text>\n";
  s << "</svg>\n";
  return s.str();
}

Canvas render_bitmap(const ConfusionMatrix& cm) {
  const Layout l = layout_for(cm);
  const std::size_t mx = max_count(cm);
  Canvas c(l.width, l.height);
  const Rgb black{0, 0, 0};
  const Rgb grey{128, 128, 128};
  for (int i = 0; i < l.k; ++i) {
    for (int j = 0; j < l.k; ++j) {
      const double t = intensity(cm, i, j, mx);
      const int x = l.left + j * l.cell;
      const int y = l.top + i * l.cell;
      c.fill(x, y, l.cell, l.cell, grey);
      c.fill(x + 1, y + 1, l.cell - 2, l.cell - 2, shade(t));
      c.text(std::to_string(cm.counts[i][j]), x + l.cell / 2, y + l.cell / 2, 2,
             t > 0.5 ? Rgb{255, 255, 255} : black);
    }
  }
  for (int i = 0; i < l.k; ++i) {
    const std::string& name = cm.labels[static_cast<std::size_t>(i)];
    c.text(name, l.left - 8 - Canvas::text_width(name, 2) / 2, l.top + i * l.cell + l.cell / 2, 2,
           black);
    c.text(name, l.left + i * l.cell + l.cell / 2, l.top + l.k * l.cell + 16, 2, black);
  }
  c.text("predicted", l.left + l.k * l.cell / 2, l.top + l.k * l.cell + 44, 2, black);
  c.text("true", 16, l.top + l.k * l.cell / 2, 2, black, true);
  c.text("confusion matrix", l.left + l.k * l.cell / 2, 22, 2, black);
  return c;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_png(const Canvas& canvas, const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(canvas.width()),
               static_cast<png_uint_32>(canvas.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < canvas.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(canvas.row(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace

void render_confusion_matrix(const ConfusionMatrix& cm, const fs::path& path) {
  if (cm.labels.empty() || cm.counts.size() != cm.labels.size()) {
    throw Error(ErrorKind::Validation, "malformed confusion matrix");
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext != ".svg" && ext != ".png") {
    throw Error(ErrorKind::Config, "unsupported image extension '" + ext + "' (use .svg or .png)");
  }
  fs::path text_path = path;
  text_path.replace_extension(".txt");
  if (ext == ".svg") {
    write_text(path, render_svg(cm));
  } else {
    write_png(render_bitmap(cm), path);
  }
  write_text(text_path, cm.to_text());
}

}  // namespace hateclf
