#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "epls/estimator.hpp"
#include "epls/gen.hpp"
#include "epls/ghcn.hpp"
#include "epls/montecarlo.hpp"

namespace epls::io {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double; "nan", "inf", "-inf" otherwise.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] double parse_double(std::string_view s);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: full contents or a DataError.
void write_file(const std::filesystem::path& path, std::string_view contents);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting; blank lines skipped.
[[nodiscard]] CsvTable parse_csv(std::string_view text);
[[nodiscard]] std::string join_csv(const std::vector<std::string>& fields);

/// Observed data: y, x with zeros where unobserved, and the mask.
struct ObservedSample {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    MaskMatrix lambda;
};

/// Header y,x1..xp,lambda_1..lambda_p; masked x cells are empty. Without
/// lambda columns the parser treats empty x cells as missing.
[[nodiscard]] std::string sample_csv(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const MaskMatrix& lambda);
[[nodiscard]] ObservedSample parse_sample_csv(std::string_view text);

/// Columns j,beta_true,beta_true_unit.
[[nodiscard]] std::string truth_csv(const Eigen::VectorXd& beta);

/// Columns j,beta_true,beta_true_unit,mean,q05,q95.
[[nodiscard]] std::string panel_csv(const PanelResult& result);
[[nodiscard]] Json panel_summary(const PanelResult& result);

/// Columns dataset,alpha,method,tailcov,rank.
[[nodiscard]] std::string ranks_csv(const RankTable& table);
/// Columns method,alpha,mean_rank,count.
[[nodiscard]] std::string mean_ranks_csv(const RankTable& table);
/// Columns k,threshold,<method>...,random_min,random_max.
[[nodiscard]] std::string tailcov_csv(const TailCovCurve& curve);

[[nodiscard]] Json direction_json(const Direction& d);
[[nodiscard]] Json threshold_json(const ThresholdSelection& sel);

/// Columns date,y,x1,x2,m1,m2; unobserved x cells are empty.
[[nodiscard]] std::string triplet_csv(const ghcn::TripletDataset& t);
[[nodiscard]] ghcn::TripletDataset parse_triplet_csv(std::string_view text, const std::string& name);
[[nodiscard]] RankDataset to_rank_dataset(const ghcn::TripletDataset& t);

/// Long format station,element,date,status,value; Absent days are omitted and
/// the parser restores them between the first and last listed date.
[[nodiscard]] std::string series_csv(const std::vector<ghcn::DailySeries>& series);
[[nodiscard]] std::vector<ghcn::DailySeries> parse_series_csv(std::string_view text);

[[nodiscard]] std::uint64_t config_hash(const Json& config);

struct RunManifest {
    std::string tool_version;
    std::uint64_t base_seed = 0;
    Json config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0.0;
    Json diagnostics = Json::object();
};

[[nodiscard]] Json manifest_json(const RunManifest& m);

}  // namespace epls::io
