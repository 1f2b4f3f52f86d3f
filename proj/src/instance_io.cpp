#include "motsp/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "motsp/trainer.hpp"

namespace motsp {

namespace {

nlohmann::json specs_json(const std::vector<ObjectiveSpec>& specs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ObjectiveSpec& s : specs)
        arr.push_back({{"kind", objective_kind_name(s.kind)},
                       {"offset", s.feature_offset},
                       {"width", s.feature_width}});
    return arr;
}

std::vector<ObjectiveSpec> specs_from(const nlohmann::json& arr) {
    std::vector<ObjectiveSpec> specs;
    for (const auto& j : arr)
        specs.push_back({objective_kind_from_name(j.at("kind").get<std::string>()),
                         j.at("offset").get<int>(), j.at("width").get<int>()});
    return specs;
}

std::string csv_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

nlohmann::json instance_to_json(const Instance& instance) {
    nlohmann::json j;
    j["n"] = instance.n;
    j["M"] = instance.M;
    j["specs"] = specs_json(instance.specs);
    j["scale"] = instance.scale;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < instance.n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < instance.d_input; ++c) row.push_back(instance.feature(i, c));
        rows.push_back(row);
    }
    j["features"] = rows;
    return j;
}

Instance instance_from_json(const nlohmann::json& j) {
    Instance inst;
    inst.n = j.at("n").get<int>();
    inst.M = j.at("M").get<int>();
    inst.specs = specs_from(j.at("specs"));
    inst.scale = j.value("scale", 1.0);
    inst.d_input = 0;
    for (const auto& s : inst.specs) inst.d_input += s.feature_width;
    const auto& rows = j.at("features");
    if (static_cast<int>(rows.size()) != inst.n) throw ParseError("instance: feature row count != n");
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != inst.d_input)
            throw ParseError("instance: feature row width != D_input");
        for (const auto& v : row) inst.features.push_back(v.get<double>());
    }
    inst.validate();
    return inst;
}

void save_instance(const std::filesystem::path& path, const Instance& instance) {
    std::ofstream out(path);
    if (!out) throw IoError("save_instance: cannot write '" + path.string() + "'");
    out << instance_to_json(instance).dump(2) << "\n";
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_instance: cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("load_instance: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return instance_from_json(j);
}

Instance gen_instance(const std::string& family, int n, std::uint64_t seed) {
    if (n < 2) throw ConfigError("gen_instance: n must be >= 2");
    Rng rng(seed);
    return sample_instances(rng, family, n, 1)[0];
}

std::vector<ObjectiveVector> FrontRecord::objectives_raw() const {
    std::vector<ObjectiveVector> raw = objectives;
    for (ObjectiveVector& f : raw)
        for (double& v : f) v *= scale;
    return raw;
}

void FrontRecord::validate() const {
    if (!is_mutually_nondominated(objectives))
        throw DomainError("front record: objective vectors are not mutually non-dominated");
    if (tours.size() != objectives.size())
        throw DomainError("front record: tours/objectives count mismatch");
}

nlohmann::json front_record_to_json(const FrontRecord& record) {
    record.validate();
    nlohmann::json j;
    j["instance_id"] = record.instance_id;
    j["algorithm"] = record.algorithm;
    j["seed"] = record.seed;
    j["params"] = record.params;
    j["scale"] = record.scale;
    nlohmann::json tours = nlohmann::json::array();
    for (const Tour& t : record.tours) tours.push_back(t.order);
    j["tours"] = tours;
    j["objectives"] = record.objectives;
    j["objectives_raw"] = record.objectives_raw();
    j["hv"] = {{"value", record.hv}, {"ref", record.hv_ref}, {"method", record.hv_method}};
    j["wall_clock_seconds"] = record.wall_clock_seconds;
    return j;
}

FrontRecord front_record_from_json(const nlohmann::json& j) {
    FrontRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = j.at("params");
    r.scale = j.at("scale").get<double>();
    for (const auto& t : j.at("tours")) {
        Tour tour;
        tour.order = t.get<std::vector<int>>();
        r.tours.push_back(std::move(tour));
    }
    r.objectives = j.at("objectives").get<std::vector<ObjectiveVector>>();
    r.hv = j.at("hv").at("value").get<double>();
    r.hv_ref = j.at("hv").at("ref").get<ObjectiveVector>();
    r.hv_method = j.at("hv").at("method").get<std::string>();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    r.validate();
    return r;
}

void save_front_record(const std::filesystem::path& path, const FrontRecord& record) {
    std::ofstream out(path);
    if (!out) throw IoError("save_front_record: cannot write '" + path.string() + "'");
    out << front_record_to_json(record).dump(2) << "\n";
}

FrontRecord load_front_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_front_record: cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("load_front_record: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return front_record_from_json(j);
}

CsvExport export_front_csv(const FrontRecord& record) {
    record.validate();
    const int M = record.hv_ref.empty()
                      ? (record.objectives.empty() ? 0 : static_cast<int>(record.objectives[0].size()))
                      : static_cast<int>(record.hv_ref.size());
    std::ostringstream csv;
    for (int k = 0; k < M; ++k) csv << (k ? "," : "") << "f_" << (k + 1);
    csv << "\n";
    for (const ObjectiveVector& f : record.objectives_raw()) {
        for (size_t k = 0; k < f.size(); ++k) csv << (k ? "," : "") << csv_double(f[k]);
        csv << "\n";
    }
    return {csv.str(), front_record_to_json(record).dump(2) + "\n"};
}

FrontRecord import_front_csv(const std::string& csv, const std::string& sidecar_json) {
    FrontRecord record = front_record_from_json(nlohmann::json::parse(sidecar_json));
    // cross-check the CSV body against the sidecar
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    if (rows != record.objectives.size())
        throw ParseError("import_front_csv: CSV row count does not match the sidecar record");
    return record;
}

}  // namespace motsp
