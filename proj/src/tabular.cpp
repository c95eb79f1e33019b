#include "credence/tabular.hpp"

#include "credence/errors.hpp"
#include "credence/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace credence {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(begin, end - begin + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw DataError("non-numeric cell '" + cell + "' in column '" + column + "' at line " +
                        std::to_string(line_no));
    }
    return value;
}

std::ptrdiff_t find_column(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : std::distance(header.begin(), it);
}

void write_number(std::ostream& out, double v) {
    out << std::setprecision(17) << v;
}

void check_scale(double& s) {
    if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
}

} // namespace

void ObservationalSample::validate() const {
    const auto n = x.rows();
    if (n < 2) throw DataError("sample needs at least 2 rows, got " + std::to_string(n));
    if (z.size() != n || y.size() != n) throw DataError("x, z, y row counts disagree");
    if (!column_names.empty() && column_names.size() != cols())
        throw DataError("column name count does not match covariate count");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (z[i] != 0.0 && z[i] != 1.0) throw DataError("non-binary treatment at row " + std::to_string(i));
    }
    if (!x.allFinite() || !y.allFinite()) throw DataError("sample contains non-finite values");
    for (auto c : binary_columns) {
        if (c >= cols()) throw DataError("binary column index out of range");
    }
}

std::size_t ObservationalSample::treated_count() const {
    return static_cast<std::size_t>((z.array() > 0.5).count());
}

void GeneratedSample::enforce_consistency() {
    y = (z.array() * y1.array() + (1.0 - z.array()) * y0.array()).matrix();
}

bool GeneratedSample::is_consistent() const {
    if (y.size() != z.size() || y0.size() != z.size() || y1.size() != z.size()) return false;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double expected = z[i] * y1[i] + (1.0 - z[i]) * y0[i];
        if (y[i] != expected) return false;
    }
    return true;
}

ObservationalSample load_observational_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || trim(line).empty()) throw DataError("empty file: " + path.string());
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
    const auto header = split_line(line);

    const auto t_idx = find_column(header, options.treatment_col);
    if (t_idx < 0) throw DataError("missing column: " + options.treatment_col);
    const auto y_idx = find_column(header, options.outcome_col);
    if (y_idx < 0) throw DataError("missing column: " + options.outcome_col);
    std::vector<std::size_t> covariate_idx;
    ObservationalSample sample;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const auto sj = static_cast<std::ptrdiff_t>(j);
        if (sj == t_idx || sj == y_idx) continue;
        if (std::find(options.ignore_cols.begin(), options.ignore_cols.end(), header[j]) != options.ignore_cols.end())
            continue;
        covariate_idx.push_back(j);
        sample.column_names.push_back(header[j]);
    }
    for (const auto& name : options.binary_cols) {
        auto it = std::find(sample.column_names.begin(), sample.column_names.end(), name);
        if (it == sample.column_names.end()) throw DataError("missing binary column: " + name);
        sample.binary_columns.push_back(static_cast<std::size_t>(std::distance(sample.column_names.begin(), it)));
    }

    std::vector<double> xs, zs, ys;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, expected " + std::to_string(header.size()));
        }
        const double t = parse_number(cells[t_idx], line_no, options.treatment_col);
        if (t != 0.0 && t != 1.0) {
            throw DataError("non-binary treatment value '" + cells[t_idx] + "' at line " + std::to_string(line_no));
        }
        zs.push_back(t);
        ys.push_back(parse_number(cells[y_idx], line_no, options.outcome_col));
        for (auto j : covariate_idx) xs.push_back(parse_number(cells[j], line_no, header[j]));
    }
    if (zs.empty()) throw DataError("no data rows in file: " + path.string());

    const auto n = static_cast<Eigen::Index>(zs.size());
    const auto p = static_cast<Eigen::Index>(covariate_idx.size());
    sample.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n, p);
    sample.z = Eigen::Map<Vector>(zs.data(), n);
    sample.y = Eigen::Map<Vector>(ys.data(), n);
    sample.validate();
    return sample;
}

std::pair<ObservationalSample, StandardizationStats> standardize(const ObservationalSample& sample) {
    const auto n = sample.x.rows();
    if (n < 2) throw DataError("standardize needs n >= 2");
    StandardizationStats stats;
    stats.x_mean = sample.x.colwise().mean().transpose();
    stats.x_scale.resize(sample.x.cols());
    ObservationalSample out = sample;
    for (Eigen::Index j = 0; j < sample.x.cols(); ++j) {
        const auto centered = sample.x.col(j).array() - stats.x_mean[j];
        double sd = std::sqrt(centered.square().sum() / static_cast<double>(n - 1));
        check_scale(sd);
        stats.x_scale[j] = sd;
        // constant columns pass through unchanged: mean 0, scale 1
        if (centered.abs().maxCoeff() == 0.0) {
            stats.x_mean[j] = 0.0;
            continue;
        }
        out.x.col(j) = (centered / sd).matrix();
    }
    stats.y_mean = sample.y.mean();
    const auto yc = sample.y.array() - stats.y_mean;
    double ysd = std::sqrt(yc.square().sum() / static_cast<double>(n - 1));
    check_scale(ysd);
    if (yc.abs().maxCoeff() == 0.0) {
        stats.y_mean = 0.0;
    } else {
        out.y = (yc / ysd).matrix();
    }
    stats.y_scale = ysd;
    return {std::move(out), std::move(stats)};
}

GeneratedSample destandardize(const GeneratedSample& generated, const StandardizationStats& stats,
                              std::span<const std::size_t> round_columns) {
    if (generated.x.cols() != stats.x_mean.size() || generated.x.cols() != stats.x_scale.size())
        throw std::invalid_argument("destandardize: covariate dimension does not match stats");
    GeneratedSample out = generated;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j)
        out.x.col(j) = (generated.x.col(j).array() * stats.x_scale[j] + stats.x_mean[j]).matrix();
    for (auto c : round_columns) {
        if (c >= out.cols()) throw std::invalid_argument("destandardize: rounding column out of range");
        out.x.col(static_cast<Eigen::Index>(c)) =
            (out.x.col(static_cast<Eigen::Index>(c)).array() >= 0.5).cast<double>().matrix();
    }
    out.y0 = (generated.y0.array() * stats.y_scale + stats.y_mean).matrix();
    out.y1 = (generated.y1.array() * stats.y_scale + stats.y_mean).matrix();
    out.enforce_consistency();
    return out;
}

ObservationalSample apply_standardization(const ObservationalSample& sample, const StandardizationStats& stats) {
    if (sample.x.cols() != stats.x_mean.size())
        throw std::invalid_argument("apply_standardization: covariate dimension does not match stats");
    ObservationalSample out = sample;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j)
        out.x.col(j) = ((sample.x.col(j).array() - stats.x_mean[j]) / stats.x_scale[j]).matrix();
    out.y = ((sample.y.array() - stats.y_mean) / stats.y_scale).matrix();
    return out;
}

ObservationalSample destandardize(const ObservationalSample& sample, const StandardizationStats& stats) {
    if (sample.x.cols() != stats.x_mean.size())
        throw std::invalid_argument("destandardize: covariate dimension does not match stats");
    ObservationalSample out = sample;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j)
        out.x.col(j) = (sample.x.col(j).array() * stats.x_scale[j] + stats.x_mean[j]).matrix();
    out.y = (sample.y.array() * stats.y_scale + stats.y_mean).matrix();
    return out;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    Rng rng = make_rng(seed, "bootstrap");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

ObservationalSample select_rows(const ObservationalSample& sample, std::span<const std::size_t> rows) {
    ObservationalSample out;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.x.resize(m, sample.x.cols());
    out.z.resize(m);
    out.y.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
        out.x.row(i) = sample.x.row(r);
        out.z[i] = sample.z[r];
        out.y[i] = sample.y[r];
    }
    out.column_names = sample.column_names;
    out.binary_columns = sample.binary_columns;
    return out;
}

ObservationalSample bootstrap_resample(const ObservationalSample& sample, std::uint64_t seed) {
    const auto idx = bootstrap_indices(sample.rows(), seed);
    return select_rows(sample, idx);
}

ObservationalSample observe(const GeneratedSample& generated) {
    ObservationalSample out;
    out.x = generated.x;
    out.z = generated.z;
    out.y = generated.y;
    out.column_names = generated.column_names;
    return out;
}

ObservationalSample drop_column(const ObservationalSample& sample, std::size_t column) {
    const auto p = static_cast<Eigen::Index>(sample.cols());
    const auto c = static_cast<Eigen::Index>(column);
    if (c >= p) throw std::invalid_argument("drop_column: index out of range");
    ObservationalSample out;
    out.x.resize(sample.x.rows(), p - 1);
    out.x.leftCols(c) = sample.x.leftCols(c);
    out.x.rightCols(p - c - 1) = sample.x.rightCols(p - c - 1);
    out.z = sample.z;
    out.y = sample.y;
    for (std::size_t j = 0; j < sample.column_names.size(); ++j)
        if (j != column) out.column_names.push_back(sample.column_names[j]);
    for (auto b : sample.binary_columns) {
        if (b < column) out.binary_columns.push_back(b);
        else if (b > column) out.binary_columns.push_back(b - 1);
    }
    return out;
}

namespace {

std::vector<std::string> covariate_header(const std::vector<std::string>& names, Eigen::Index p) {
    if (static_cast<Eigen::Index>(names.size()) == p) return names;
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < p; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

void write_rows(const std::filesystem::path& path, const Matrix& x, const std::vector<std::string>& names,
                const std::vector<std::pair<std::string, const Vector*>>& extra) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    const auto header = covariate_header(names, x.cols());
    bool first = true;
    for (const auto& h : header) {
        out << (first ? "" : ",") << h;
        first = false;
    }
    for (const auto& [name, _] : extra) out << (first ? "" : ",") << name, first = false;
    out << '\n';
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        first = true;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (!first) out << ',';
            write_number(out, x(i, j));
            first = false;
        }
        for (const auto& [_, v] : extra) {
            if (!first) out << ',';
            write_number(out, (*v)[i]);
            first = false;
        }
        out << '\n';
    }
}

} // namespace

void write_csv(const std::filesystem::path& path, const ObservationalSample& sample, const std::string& treatment_col,
               const std::string& outcome_col) {
    write_rows(path, sample.x, sample.column_names, {{treatment_col, &sample.z}, {outcome_col, &sample.y}});
}

void write_csv(const std::filesystem::path& path, const GeneratedSample& sample, const std::string& treatment_col,
               const std::string& outcome_col) {
    write_rows(path, sample.x, sample.column_names,
               {{treatment_col, &sample.z}, {outcome_col, &sample.y}, {"y0", &sample.y0}, {"y1", &sample.y1}});
}

} // namespace credence
