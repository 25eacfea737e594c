#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "epls/tailstats.hpp"

namespace epls::ghcn {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; nullopt on anything else or an invalid calendar date.
[[nodiscard]] std::optional<Date> parse_date(std::string_view text);
[[nodiscard]] std::string format_date(Date d);

struct Station {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
    double elevation = 0.0;
    std::string state;
    std::string name;
};

struct ParseIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

/// Fixed-width inventory (1-based inclusive): ID 1-11, LATITUDE 13-20,
/// LONGITUDE 22-30, ELEVATION 32-37, STATE 39-40, NAME 42-71.
struct StationParse {
    std::vector<Station> stations;
    std::vector<ParseIssue> errors;
};
[[nodiscard]] StationParse parse_stations(std::string_view text);

enum class Element { Prcp, Tmax };
[[nodiscard]] std::string to_string(Element e);
[[nodiscard]] std::optional<Element> element_from_string(std::string_view s);

enum class EntryState { Absent, Missing, Value };

struct Entry {
    EntryState state = EntryState::Absent;
    double value = 0.0;  // mm for PRCP, degrees C for TMAX
};

/// One .dly line: the valid calendar days of a station-month.
struct DlyFragment {
    std::string station_id;
    Element element = Element::Prcp;
    int year = 0;
    unsigned month = 0;
    std::vector<std::pair<unsigned, Entry>> days;  // (day, Missing or Value)
};

struct DlyParse {
    std::vector<DlyFragment> fragments;
    std::vector<ParseIssue> errors;
};
[[nodiscard]] DlyParse parse_dly(std::string_view text);

struct DailySeries {
    std::string station_id;
    Element element = Element::Prcp;
    std::vector<Date> dates;  // strictly increasing
    std::vector<Entry> values;
};

/// One series per (station, element), covering every day of [from, to];
/// days with no entry are Absent. Later fragments overwrite earlier ones.
[[nodiscard]] std::vector<DailySeries> assemble_series(const std::vector<DlyFragment>& fragments, Date from, Date to);

struct StationFilter {
    std::optional<std::string> state = std::string("TX");
    /// lat_min, lat_max, lon_min, lon_max; used instead of the state when set.
    std::optional<std::array<double, 4>> bbox;
    std::vector<std::string> keywords{"airport", "afb", "intl", "weather service", "observatory"};
};
[[nodiscard]] std::vector<Station> filter_stations(const std::vector<Station>& stations, const StationFilter& filter);

enum class MissingPolicy { Drop, ImputeZero };

struct YClassification {
    std::string station_id;
    bool eligible = false;
    double missing_fraction = 0.0;
    std::vector<Date> dates;  // retained dates
    Eigen::VectorXd values;
};

/// Absent days are removed first; eligible iff Missing <= 1% of the rest.
/// Remaining Missing days are dropped (or set to 0 under ImputeZero).
[[nodiscard]] YClassification classify_y(const DailySeries& prcp, MissingPolicy policy = MissingPolicy::Drop,
                                         double max_missing = 0.01);

struct XClassification {
    std::string station_id;
    bool eligible = false;
    double missing_fraction = 0.0;
    Eigen::VectorXd values;  // 0 where unobserved
    Eigen::VectorXd mask;    // 1 observed, 0 missing
};

/// Aligns a TMAX series on the retained Y dates; a date with no entry counts
/// as missing. Eligible iff the missing fraction lies in [min, max].
[[nodiscard]] XClassification classify_x(const DailySeries& tmax, const std::vector<Date>& y_dates,
                                         double min_missing = 0.05, double max_missing = 0.20);

struct TripletDataset {
    std::string y_station;
    std::string x1_station;
    std::string x2_station;
    std::vector<Date> dates;
    Eigen::VectorXd y;
    Eigen::VectorXd x1;
    Eigen::VectorXd x2;
    Eigen::VectorXd m1;
    Eigen::VectorXd m2;

    [[nodiscard]] std::string name() const { return y_station + "_" + x1_station + "_" + x2_station; }
};

struct YWithX {
    YClassification y;
    std::vector<XClassification> x;  // X-eligible stations aligned on y.dates
};

/// Every unordered pair of distinct X stations with each Y station.
[[nodiscard]] std::vector<TripletDataset> build_triplets(const std::vector<YWithX>& candidates);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    Eigen::MatrixXd table;  // windows x 4 cells (00, 01, 10, 11) after the +0.5 correction
};

/// Homogeneity of the joint (m1, m2) patterns across equal time blocks.
[[nodiscard]] ChiSquareResult mask_stationarity_chisq(const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
                                                      std::size_t n_windows);

/// Upper tail of the chi-square law with df degrees of freedom.
[[nodiscard]] double chisq_upper_tail(double statistic, double df);

/// Pearson correlation over each sliding window of jointly observed entries;
/// NaN when fewer than `min_joint` pairs are observed. Masks default to all ones.
[[nodiscard]] std::vector<double> rolling_correlation(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                                                      std::size_t window = 100, const Eigen::VectorXd* m1 = nullptr,
                                                      const Eigen::VectorXd* m2 = nullptr, std::size_t min_joint = 10);

struct AdmissibilitySettings {
    double x_min_missing = 0.05;
    double x_max_missing = 0.20;
    std::size_t chisq_windows = 10;
    double chisq_level = 0.05;
    bool drift_gate = true;
    std::size_t rolling_window = 100;
    /// Range of the rolling mean of Y over the median rolling sd of Y.
    double max_mean_drift = 2.0;
    /// Range (max - min) of the rolling correlation of X1 and X2.
    double max_corr_range = 1.0;
    PlateauSettings plateau;  // window is rescaled from k_max when use_default_window
    bool use_default_window = true;
};

struct Verdict {
    bool passed = false;
    std::optional<std::string> failed_gate;
    std::vector<std::string> reasons;
    double chisq_p = std::numeric_limits<double>::quiet_NaN();
    double mean_drift = std::numeric_limits<double>::quiet_NaN();
    double corr_range = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> gamma_hat;
};

/// Gates in order: completeness, mask stationarity, drift, heavy tail.
[[nodiscard]] Verdict admissibility(const TripletDataset& triplet, const AdmissibilitySettings& settings = {});

}  // namespace epls::ghcn
