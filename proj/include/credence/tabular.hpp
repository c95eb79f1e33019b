#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace credence {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observed data: covariates x (n x p), binary treatment z, outcome y.
///
/// z is stored as doubles holding exactly 0.0 or 1.0 so it can enter
/// arithmetic directly.
struct ObservationalSample {
    Matrix x;
    Vector z;
    Vector y;
    std::vector<std::string> column_names;
    std::vector<std::size_t> binary_columns;

    std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }

    /// Throws DataError if dimensions disagree, z is not binary, any value is
    /// non-finite, or n < 2.
    void validate() const;

    std::size_t treated_count() const;
    std::size_t control_count() const { return rows() - treated_count(); }
};

/// A sample with both potential outcomes attached. y = z*y1 + (1-z)*y0.
struct GeneratedSample {
    Matrix x;
    Vector z;
    Vector y0;
    Vector y1;
    Vector y;
    std::vector<std::string> column_names;

    std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }

    /// Recomputes y from z, y0, y1.
    void enforce_consistency();
    bool is_consistent() const;
};

/// Affine maps used to standardize covariates and outcome.
/// Scale entries are always > 0; constant columns get scale 1.
struct StandardizationStats {
    Vector x_mean;
    Vector x_scale;
    double y_mean = 0.0;
    double y_scale = 1.0;
};

struct CsvOptions {
    std::string treatment_col;
    std::string outcome_col;
    std::vector<std::string> binary_cols;
    // Columns dropped entirely (for example y0/y1 in generated files).
    std::vector<std::string> ignore_cols;
};

ObservationalSample load_observational_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Returns standardized copy plus the stats needed to invert it.
/// Uses the n-1 denominator for the standard deviation.
std::pair<ObservationalSample, StandardizationStats> standardize(const ObservationalSample& sample);

/// Inverse of `standardize` applied to x, y0, y1; y is recomputed.
/// Columns listed in `round_columns` are thresholded at 0.5 after inversion.
GeneratedSample destandardize(const GeneratedSample& generated, const StandardizationStats& stats,
                              std::span<const std::size_t> round_columns = {});

/// Forward map with previously fitted stats.
ObservationalSample apply_standardization(const ObservationalSample& sample, const StandardizationStats& stats);

/// Inverse map for an observational sample (used for round-trip checks).
ObservationalSample destandardize(const ObservationalSample& sample, const StandardizationStats& stats);

/// n rows drawn uniformly with replacement; deterministic given seed.
ObservationalSample bootstrap_resample(const ObservationalSample& sample, std::uint64_t seed);

/// Row indices for a bootstrap draw of size n.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

ObservationalSample select_rows(const ObservationalSample& sample, std::span<const std::size_t> rows);

/// Drops the potential outcomes.
ObservationalSample observe(const GeneratedSample& generated);

ObservationalSample drop_column(const ObservationalSample& sample, std::size_t column);

/// Writes x columns, then z, y, and (for generated samples) y0, y1.
/// Numbers are printed with 17 significant digits so files round-trip.
void write_csv(const std::filesystem::path& path, const ObservationalSample& sample,
               const std::string& treatment_col = "z", const std::string& outcome_col = "y");
void write_csv(const std::filesystem::path& path, const GeneratedSample& sample,
               const std::string& treatment_col = "z", const std::string& outcome_col = "y");

} // namespace credence
