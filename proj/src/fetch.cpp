#include "promptloop/fetch.hpp"

#include "promptloop/cache.hpp"
#include "promptloop/errors.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace promptloop {

using nlohmann::json;

namespace {

constexpr const char* kDefaultSourceBase = "https://raw.githubusercontent.com";

struct SourceFile {
    std::string url_path;    // appended to the source base
    std::string local_path;  // relative to data_dir
    bool convert_mawps = false;
};

std::vector<SourceFile> source_files(TaskKind dataset) {
    switch (dataset) {
        case TaskKind::object_counting:
            return {{"/suzgunmirac/BIG-Bench-Hard/main/bbh/object_counting.json",
                     "object_counting/object_counting.json"}};
        case TaskKind::word_sorting:
            return {{"/suzgunmirac/BIG-Bench-Hard/main/bbh/word_sorting.json",
                     "word_sorting/word_sorting.json"}};
        case TaskKind::gsm8k:
            return {{"/openai/grade-school-math/master/grade_school_math/data/train.jsonl",
                     "gsm8k/train.jsonl"},
                    {"/openai/grade-school-math/master/grade_school_math/data/test.jsonl",
                     "gsm8k/test.jsonl"}};
        case TaskKind::svamp:
            return {{"/arkilpatel/SVAMP/main/SVAMP.json", "svamp/test.json"},
                    {"/arkilpatel/SVAMP/main/data/mawps-asdiv-a_svamp/train.csv",
                     "svamp/trainval.json", /*convert_mawps=*/true}};
        case TaskKind::aquarat:
            return {{"/google-deepmind/AQuA/master/train.json", "aquarat/train.jsonl"},
                    {"/google-deepmind/AQuA/master/dev.json", "aquarat/dev.jsonl"},
                    {"/google-deepmind/AQuA/master/test.json", "aquarat/test.jsonl"}};
    }
    throw UnsupportedTaskError("unknown dataset");
}

const char* dataset_notes(TaskKind dataset) {
    switch (dataset) {
        case TaskKind::object_counting:
        case TaskKind::word_sorting:
            return "BBH task file; splits 50/100/100 taken in the source file's canonical order "
                   "(train = first 50, validation = next 100, test = next 100).";
        case TaskKind::gsm8k:
            return "Official GSM8K files; train = first 200 of train.jsonl, validation = next "
                   "300, test = all of test.jsonl (1319).";
        case TaskKind::svamp:
            return "test.json is the 1000-item SVAMP challenge set. trainval.json is the "
                   "combined MAWPS+ASDiv-A training resource (3138 records) converted from its "
                   "CSV distribution at fetch time, numbers substituted into the templated "
                   "questions; train = first 2516 in file order, validation = next 622. The "
                   "2516/622 partition is this artifact's deterministic choice.";
        case TaskKind::aquarat:
            return "Official AQuA-RAT JSONL files (train/dev/test). The train split is loadable "
                   "but unused by any shipped experiment.";
    }
    return "";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string download(const std::string& base, const std::string& url_path) {
    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(60, 0);
    client.set_read_timeout(300, 0);
    auto res = client.Get(url_path);
    if (!res) {
        throw BackendUnavailableError("download failed for " + base + url_path + ": " +
                                      httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw BackendUnavailableError("download of " + base + url_path + " returned status " +
                                      std::to_string(res->status));
    }
    return res->body;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                field.clear();
                row.clear();
                any = false;
                break;
            default:
                field.push_back(c);
                any = true;
                break;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string convert_mawps_csv_to_svamp_json(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.size() < 2) throw DatasetError("MAWPS CSV has no data rows");
    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int q_col = column("Question");
    const int n_col = column("Numbers");
    const int a_col = column("Answer");
    if (q_col < 0 || a_col < 0) {
        throw DatasetError("MAWPS CSV is missing Question/Answer columns");
    }

    json records = json::array();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (static_cast<int>(row.size()) <= std::max(q_col, a_col)) {
            throw DatasetError("short MAWPS CSV row " + std::to_string(r));
        }
        std::string question = row[q_col];
        if (n_col >= 0 && static_cast<int>(row.size()) > n_col) {
            // Substitute numberK placeholders with the Numbers column values.
            std::vector<std::string> numbers;
            std::istringstream in(row[n_col]);
            std::string value;
            while (in >> value) {
                if (auto canon = canonicalize_number(value)) {
                    numbers.push_back(*canon);
                } else {
                    numbers.push_back(value);
                }
            }
            for (std::size_t k = numbers.size(); k-- > 0;) {
                const std::string placeholder = "number" + std::to_string(k);
                std::size_t pos = 0;
                while ((pos = question.find(placeholder, pos)) != std::string::npos) {
                    question.replace(pos, placeholder.size(), numbers[k]);
                    pos += numbers[k].size();
                }
            }
        }
        json rec;
        rec["ID"] = "mawps-asdiv-a-" + std::to_string(r - 1);
        rec["Body"] = "";
        rec["Question"] = question;
        rec["Answer"] = row[a_col];
        records.push_back(std::move(rec));
    }
    return records.dump(1);
}

int cmd_fetch(const std::vector<std::string>& datasets, const FetchOptions& options,
              std::ostream& out, std::ostream& err) {
    std::vector<TaskKind> tasks;
    if (datasets.empty()) {
        tasks = {TaskKind::object_counting, TaskKind::word_sorting, TaskKind::gsm8k,
                 TaskKind::svamp, TaskKind::aquarat};
    } else {
        for (const auto& name : datasets) {
            auto task = task_from_string(name);
            if (!task) {
                err << "unknown dataset: " << name << "\n";
                return 1;
            }
            tasks.push_back(*task);
        }
    }
    const std::string base = options.source_base.empty() ? kDefaultSourceBase
                                                         : options.source_base;
    const auto manifest_path = options.data_dir / "manifest.json";
    json manifest;
    if (std::filesystem::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        try {
            in >> manifest;
        } catch (const json::exception& ex) {
            err << "corrupt manifest " << manifest_path.string() << ": " << ex.what() << "\n";
            return 3;
        }
    }
    if (!manifest.contains("datasets")) manifest["datasets"] = json::object();

    try {
        for (TaskKind task : tasks) {
            json& entry = manifest["datasets"][to_string(task)];
            if (!entry.contains("files")) entry["files"] = json::object();
            entry["notes"] = dataset_notes(task);
            for (const SourceFile& source : source_files(task)) {
                const auto local = options.data_dir / source.local_path;
                json& file_entry = entry["files"][source.local_path];
                if (std::filesystem::exists(local)) {
                    const std::string hash = sha256_hex(read_file(local));
                    if (file_entry.contains("sha256")) {
                        if (file_entry["sha256"] == hash) {
                            out << "ok       " << source.local_path << " (hash match, skipped)\n";
                            continue;
                        }
                        err << "integrity failure: " << local.string()
                            << " does not match its manifest hash; delete it to re-fetch\n";
                        return 3;
                    }
                    // Present but unrecorded (e.g. hand-placed file): adopt it.
                    file_entry["sha256"] = hash;
                    file_entry["bytes"] = std::filesystem::file_size(local);
                    file_entry["url"] = base + source.url_path;
                    out << "adopted  " << source.local_path << "\n";
                    continue;
                }
                std::string body = download(base, source.url_path);
                if (source.convert_mawps) body = convert_mawps_csv_to_svamp_json(body);
                std::filesystem::create_directories(local.parent_path());
                {
                    std::ofstream file(local, std::ios::binary | std::ios::trunc);
                    file << body;
                }
                file_entry["sha256"] = sha256_hex(body);
                file_entry["bytes"] = body.size();
                file_entry["url"] = base + source.url_path;
                if (source.convert_mawps) file_entry["converted"] = "mawps-csv-to-svamp-json";
                out << "fetched  " << source.local_path << " (" << body.size() << " bytes)\n";
            }
        }
    } catch (const BackendUnavailableError& ex) {
        err << ex.what() << "\n";
        return 2;
    } catch (const Error& ex) {
        err << ex.what() << "\n";
        return 2;
    }

    std::filesystem::create_directories(options.data_dir);
    std::ofstream mf(manifest_path, std::ios::trunc);
    mf << manifest.dump(2) << "\n";
    out << "manifest: " << manifest_path.string() << "\n";
    return 0;
}

}  // namespace promptloop
