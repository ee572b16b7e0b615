#include "fracmem/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace fracmem::io {

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

void dump(const Json& v, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += sep;
        dump(it.value(), indent, depth + 1, out);
      }
      out += close;
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) out += pad;
        dump(e, indent, depth + 1, out);
      }
      if (!flat) out += close;
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  dump(value, indent, 0, out);
  out += '\n';
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::filesystem::filesystem_error("cannot open for writing", tmp,
                                                    std::make_error_code(std::errc::io_error));
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw std::filesystem::filesystem_error("write failed", tmp,
                                                    std::make_error_code(std::errc::io_error));
  }
  std::filesystem::rename(tmp, path);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(columns_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out = kSchemaLine;
  out += '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string fields_csv(const DomainMask& domain, const Field& u, const Configuration* d) {
  CsvTable t({"cell", "i", "j", "x", "y", "u", "in_D"});
  const auto& g = domain.grid();
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const auto cell = domain.cell(k);
    const auto ij = g.index(cell);
    const auto x = g.center(cell);
    t.add_row({std::to_string(cell), std::to_string(ij[0]), std::to_string(ij[1]), format_number(x[0]),
               format_number(x[1]), format_number(u[static_cast<Eigen::Index>(k)]),
               d && d->in_d[k] ? "1" : "0"});
  }
  return t.str();
}

std::string svg_heatmap(const DomainMask& domain, const Field& values, double lo, double hi,
                        const std::string& title) {
  const auto& g = domain.grid();
  const int px = std::max(2, 512 / g.n);
  const int width = px * g.n;
  const int rows = g.dim == 1 ? 1 : g.n;
  const int height = px * rows * (g.dim == 1 ? 8 : 1);
  const int cell_h = g.dim == 1 ? height : px;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" shape-rendering=\"crispEdges\">\n";
  os << "<title>" << title << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"rgb(255,0,0)\" fill-opacity=\"0.08\"/>\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const auto ij = g.index(domain.cell(k));
    const double f = std::clamp((values[static_cast<Eigen::Index>(k)] - lo) / span, 0.0, 1.0);
    const int level = static_cast<int>(std::lround(255.0 * (1.0 - f)));
    const int y = g.dim == 1 ? 0 : (g.n - 1 - ij[1]) * px;
    os << "<rect x=\"" << ij[0] * px << "\" y=\"" << y << "\" width=\"" << px << "\" height=\"" << cell_h
       << "\" fill=\"rgb(" << level << ',' << level << ',' << level << ")\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fracmem::io
