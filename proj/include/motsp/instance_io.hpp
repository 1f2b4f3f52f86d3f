#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motsp/core.hpp"

namespace motsp {

nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);
void save_instance(const std::filesystem::path& path, const Instance& instance);
Instance load_instance(const std::filesystem::path& path);

/// Seeded instance with uniform [0,1] features for the named family.
Instance gen_instance(const std::string& family, int n, std::uint64_t seed);

/// One benchmark cell result: a front with its tours, hypervolume record and
/// timing. Objectives are stored at normalized scale; raw scale = * scale.
struct FrontRecord {
    std::string instance_id;
    std::string algorithm;
    std::uint64_t seed = 0;
    nlohmann::json params;  // algorithm configuration
    double scale = 1.0;
    std::vector<Tour> tours;
    std::vector<ObjectiveVector> objectives;
    double hv = 0.0;
    ObjectiveVector hv_ref;
    std::string hv_method;
    double wall_clock_seconds = 0.0;  // rounded to 0.1 s

    std::vector<ObjectiveVector> objectives_raw() const;
    /// Throws DomainError unless the stored front is mutually non-dominated.
    void validate() const;
};

nlohmann::json front_record_to_json(const FrontRecord& record);
FrontRecord front_record_from_json(const nlohmann::json& j);
void save_front_record(const std::filesystem::path& path, const FrontRecord& record);
FrontRecord load_front_record(const std::filesystem::path& path);

struct CsvExport {
    std::string csv;           // header f_1..f_M, one row per solution, raw scale
    std::string sidecar_json;  // full record for lossless re-import
};

CsvExport export_front_csv(const FrontRecord& record);
FrontRecord import_front_csv(const std::string& csv, const std::string& sidecar_json);

}  // namespace motsp
