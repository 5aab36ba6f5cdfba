#include <algorithm>
#include <fstream>

#include "council/errors.hpp"
#include "council/experiment.hpp"

namespace council {

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) {
    if (root_.empty()) throw ConfigError("run store root must not be empty");
}

std::string RunStore::run_id(const std::string& scenario_id, const std::string& variant,
                             ExperimentState state, int index) {
    return scenario_id + "-" + variant + "-" + to_string(state) + "-r" + std::to_string(index);
}

int RunStore::run_index_of(const std::string& run_id) {
    auto pos = run_id.rfind("-r");
    if (pos != std::string::npos && pos + 2 < run_id.size()) {
        std::size_t used = 0;
        try {
            int index = std::stoi(run_id.substr(pos + 2), &used);
            if (used == run_id.size() - pos - 2 && index >= 0) return index;
        } catch (const std::exception&) {
        }
    }
    throw DataError("run id '" + run_id + "' has no trailing -r<index>");
}

std::filesystem::path RunStore::path_for(const std::string& scenario_id,
                                         const std::string& variant, ExperimentState state,
                                         const std::string& run_id) const {
    return root_ / scenario_id / variant / to_string(state) / (run_id + ".json");
}

bool RunStore::exists(const std::string& scenario_id, const std::string& variant,
                      ExperimentState state, const std::string& run_id) const {
    return std::filesystem::exists(path_for(scenario_id, variant, state, run_id));
}

void RunStore::save(const DeliberationRecord& record) const {
    auto path = path_for(record.scenario_id, record.variant, record.state, record.run_id);
    if (std::filesystem::exists(path)) {
        throw IoError("run " + record.run_id + " already persisted at " + path.string());
    }
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << to_json(record).dump(2) << "\n";
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot finalize " + path.string() + ": " + ec.message());
    }
}

DeliberationRecord RunStore::load(const std::filesystem::path& file) const {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open run file " + file.string());
    ojson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("run file " + file.string() + " is not valid JSON: " + e.what());
    }
    return record_from_json(j);
}

std::vector<DeliberationRecord> RunStore::load_state(const std::string& scenario_id,
                                                     const std::string& variant,
                                                     ExperimentState state) const {
    auto dir = root_ / scenario_id / variant / to_string(state);
    std::vector<DeliberationRecord> records;
    if (!std::filesystem::exists(dir)) return records;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        DeliberationRecord record = load(entry.path());
        if (record.scenario_id != scenario_id || record.variant != variant ||
            record.state != state) {
            throw DataError("run file " + entry.path().string() +
                            " does not match its store location");
        }
        records.push_back(std::move(record));
    }
    std::sort(records.begin(), records.end(),
              [](const DeliberationRecord& x, const DeliberationRecord& y) {
                  return run_index_of(x.run_id) < run_index_of(y.run_id);
              });
    return records;
}

} // namespace council
