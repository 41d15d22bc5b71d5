#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksmi/bench.hpp"
#include "ksmi/ksmi_estimator.hpp"
#include "ksmi/samples.hpp"

namespace ksmi {

// Malformed input file; the message names the offending line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unwritable/unreadable path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric table with named columns. NaN cells are written empty.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

// Header "x1,...,x{dx},y1,...,y{dy}", then one sample per row.
PairedSamples read_paired_csv(const std::string& path);
PairedSamples parse_paired_csv(std::istream& in);
void write_paired_csv(const PairedSamples& samples, std::ostream& out);
void write_paired_csv(const PairedSamples& samples, const std::string& path);

// k,m,n,estimate_nats,empirical_std,theory_bound
Table report_table(const KsmiReport& report);
// d,k,population_ksmi_nats,empirical_std,theory_bound
Table dimension_table(const std::vector<DimensionRow>& rows);
// d,k,n,auc
Table independence_table(const std::vector<IndependenceRow>& rows);
// k,d,n,estimate_nats,truth_nats,abs_error_nats
Table neural_rate_table(const std::vector<NeuralRateRow>& rows);

// 12 significant digits, '\n' line endings.
void write_csv(const Table& table, std::ostream& out);
void write_csv(const Table& table, const std::string& path);

// Line plot of y_col against x_col, one polyline per distinct value of the
// group columns. Axes are labeled with the column names.
void write_svg_plot(const Table& table, const std::string& x_col,
                    const std::string& y_col,
                    const std::vector<std::string>& group_cols,
                    std::ostream& out);
void write_svg_plot(const Table& table, const std::string& x_col,
                    const std::string& y_col,
                    const std::vector<std::string>& group_cols,
                    const std::string& path);

}  // namespace ksmi
