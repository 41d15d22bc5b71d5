#include "ksmi/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ksmi {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw std::invalid_argument("table has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

PairedSamples parse_paired_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw FormatError("line 1: empty file (expected header x1..,y1..)");
  }
  const auto header = split(line);
  std::size_t dx = 0;
  std::size_t dy = 0;
  for (const auto& name : header) {
    if (dy == 0 && name == "x" + std::to_string(dx + 1)) {
      ++dx;
    } else if (name == "y" + std::to_string(dy + 1)) {
      ++dy;
    } else {
      throw FormatError("line 1: malformed header field '" + name +
                        "' (expected x1..x{dx},y1..y{dy})");
    }
  }
  if (dx == 0 || dy == 0) {
    throw FormatError("line 1: header needs at least one x and one y column");
  }

  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != dx + dy) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dx + dy) + " fields, got " +
                        std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(c + 1) + ": not a number: '" + f + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(c + 1) + ": non-finite value '" + f +
                          "'");
      }
      values.push_back(v);
    }
    ++n;
  }
  if (n == 0) throw FormatError("line 2: no data rows");

  const Eigen::Map<const Matrix> all(values.data(), static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(dx + dy));
  return {all.leftCols(static_cast<Eigen::Index>(dx)),
          all.rightCols(static_cast<Eigen::Index>(dy))};
}

PairedSamples read_paired_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return parse_paired_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_paired_csv(const PairedSamples& samples, std::ostream& out) {
  samples.validate();
  std::string row;
  for (std::size_t c = 0; c < samples.dx(); ++c) {
    row += (c ? ",x" : "x") + std::to_string(c + 1);
  }
  for (std::size_t c = 0; c < samples.dy(); ++c) {
    row += ",y" + std::to_string(c + 1);
  }
  out << row << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < samples.x.rows(); ++i) {
    row.clear();
    for (Eigen::Index c = 0; c < samples.x.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c ? ",%.17g" : "%.17g", samples.x(i, c));
      row += buf;
    }
    for (Eigen::Index c = 0; c < samples.y.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", samples.y(i, c));
      row += buf;
    }
    out << row << '\n';
  }
}

void write_paired_csv(const PairedSamples& samples, const std::string& path) {
  auto out = open_output(path);
  write_paired_csv(samples, out);
  check_written(out, path);
}

Table report_table(const KsmiReport& report) {
  return {{"k", "m", "n", "estimate_nats", "empirical_std", "theory_bound"},
          {{static_cast<double>(report.k), static_cast<double>(report.m),
            static_cast<double>(report.n), report.estimate,
            report.empirical_std, report.theory_bound.value_or(NAN)}}};
}

Table dimension_table(const std::vector<DimensionRow>& rows) {
  Table t{{"d", "k", "population_ksmi_nats", "empirical_std", "theory_bound"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.d), static_cast<double>(r.k),
                      r.population_ksmi, r.empirical_std, r.theory_bound});
  }
  return t;
}

Table independence_table(const std::vector<IndependenceRow>& rows) {
  Table t{{"d", "k", "n", "auc"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.d), static_cast<double>(r.k),
                      static_cast<double>(r.n), r.auc});
  }
  return t;
}

Table neural_rate_table(const std::vector<NeuralRateRow>& rows) {
  Table t{{"k", "d", "n", "estimate_nats", "truth_nats", "abs_error_nats"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.k), static_cast<double>(r.d),
                      static_cast<double>(r.n), r.estimate, r.truth,
                      r.abs_error});
  }
  return t;
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_number(row[c]);
    }
    out << '\n';
  }
}

void write_csv(const Table& table, const std::string& path) {
  auto out = open_output(path);
  write_csv(table, out);
  check_written(out, path);
}

void write_svg_plot(const Table& table, const std::string& x_col,
                    const std::string& y_col,
                    const std::vector<std::string>& group_cols,
                    std::ostream& out) {
  const std::size_t xi = table.column(x_col);
  const std::size_t yi = table.column(y_col);
  std::vector<std::size_t> gi;
  for (const auto& g : group_cols) gi.push_back(table.column(g));

  std::map<std::vector<double>, std::vector<std::pair<double, double>>> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& row : table.rows) {
    if (std::isnan(row[xi]) || std::isnan(row[yi])) continue;
    std::vector<double> key;
    for (auto g : gi) key.push_back(row[g]);
    series[key].emplace_back(row[xi], row[yi]);
    xmin = std::min(xmin, row[xi]);
    xmax = std::max(xmax, row[xi]);
    ymin = std::min(ymin, row[yi]);
    ymax = std::max(ymax, row[yi]);
  }
  if (series.empty()) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  constexpr double width = 640, height = 420, left = 70, right = 150,
                   top = 20, bottom = 50;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto sy = [&](double y) {
    return top + ph - (y - ymin) / (ymax - ymin) * ph;
  };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\""
      << left + pw << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << format_number(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\">" << format_number(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << x_col << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\">" << y_col << "</text>\n";

  std::size_t s = 0;
  for (auto& [key, points] : series) {
    std::sort(points.begin(), points.end());
    const char* color = palette[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : points) out << sx(x) << ',' << sy(y) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : points) {
      out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    std::string label;
    for (std::size_t g = 0; g < key.size(); ++g) {
      label += (g ? " " : "") + group_cols[g] + "=" + format_number(key[g]);
    }
    if (label.empty()) label = y_col;
    const double ly = top + 14.0 * static_cast<double>(s);
    out << "<text x=\"" << left + pw + 12 << "\" y=\"" << ly + 10
        << "\" fill=\"" << color << "\">" << label << "</text>\n";
    ++s;
  }
  out << "</svg>\n";
}

void write_svg_plot(const Table& table, const std::string& x_col,
                    const std::string& y_col,
                    const std::vector<std::string>& group_cols,
                    const std::string& path) {
  auto out = open_output(path);
  write_svg_plot(table, x_col, y_col, group_cols, out);
  check_written(out, path);
}

}  // namespace ksmi
