#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

namespace testutil {

/// Self-cleaning unique temp directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("promptloop-" + tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::filesystem::path source_dir() {
    return std::filesystem::path(PROMPTLOOP_SOURCE_DIR);
}

inline std::filesystem::path templates_dir() {
    return source_dir() / "templates";
}

inline std::filesystem::path fixtures_dir() {
    return source_dir() / "tests" / "fixtures";
}

// --- synthetic datasets in the public distribution formats ---

inline const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> pool = {
        "apple", "banana", "cherry", "date",   "elder",  "fig",    "grape",  "honey",
        "iris",  "jade",   "kiwi",   "lemon",  "mango",  "nectar", "olive",  "peach",
        "quince", "rose",  "sage",   "thyme",  "umber",  "violet", "walnut", "xenon",
        "yarrow", "zinnia"};
    return pool;
}

inline std::string bbh_file(const std::string& task, int count) {
    nlohmann::json examples = nlohmann::json::array();
    for (int i = 0; i < count; ++i) {
        nlohmann::json ex;
        if (task == "object_counting") {
            const int n = i % 9 + 1;
            ex["input"] = "I have " + std::to_string(n) + " plums and a chair. How many fruits do I have?";
            ex["target"] = std::to_string(n);
        } else {
            const auto& pool = word_pool();
            std::vector<std::string> words;
            for (int w = 0; w < 3; ++w) words.push_back(pool[(i + w * 7) % pool.size()]);
            std::sort(words.begin(), words.end());
            words.erase(std::unique(words.begin(), words.end()), words.end());
            std::string list, target;
            for (std::size_t w = 0; w < words.size(); ++w) {
                list += (w ? ", " : "") + words[w];
                target += (w ? " " : "") + words[w];
            }
            ex["input"] = "Sort the following words alphabetically: " + list;
            ex["target"] = target;
        }
        examples.push_back(std::move(ex));
    }
    return nlohmann::json{{"examples", examples}}.dump();
}

inline std::string gsm8k_file(int count, int salt = 0) {
    std::string out;
    for (int i = 0; i < count; ++i) {
        const int n = (i * 7 + salt) % 500 + 1;
        nlohmann::json rec;
        rec["question"] = "Ann has " + std::to_string(n) + " pens and buys none. How many pens does she have?";
        rec["answer"] = "She keeps all of them.\n#### " + std::to_string(n);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

inline std::string svamp_file(int count, int salt = 0) {
    nlohmann::json records = nlohmann::json::array();
    for (int i = 0; i < count; ++i) {
        const int n = (i * 3 + salt) % 200 + 1;
        nlohmann::json rec;
        rec["ID"] = "syn-" + std::to_string(i);
        rec["Body"] = "A farmer has " + std::to_string(n) + " hens.";
        rec["Question"] = "How many hens does the farmer have?";
        rec["Answer"] = static_cast<double>(n);
        records.push_back(std::move(rec));
    }
    return records.dump();
}

inline std::string aqua_file(int count, int salt = 0) {
    std::string out;
    static const char* letters = "ABCDE";
    for (int i = 0; i < count; ++i) {
        const char correct = letters[(i + salt) % 5];
        nlohmann::json rec;
        rec["question"] = "What is " + std::to_string(i) + " + 1?";
        rec["options"] = {std::string("A)") + std::to_string(i), std::string("B)") + std::to_string(i + 1),
                          std::string("C)") + std::to_string(i + 2), std::string("D)") + std::to_string(i + 3),
                          std::string("E)none")};
        rec["rationale"] = "Add one.";
        rec["correct"] = std::string(1, correct);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

/// Writes all five benchmarks at the declared split sizes (aquarat train is
/// large; pass full_aqua=false to keep unit tests fast -- aquarat loads will
/// then only work for dev/test).
inline void write_synthetic_data_dir(const std::filesystem::path& dir, bool full_aqua = false) {
    write_file(dir / "object_counting" / "object_counting.json", bbh_file("object_counting", 250));
    write_file(dir / "word_sorting" / "word_sorting.json", bbh_file("word_sorting", 250));
    write_file(dir / "gsm8k" / "train.jsonl", gsm8k_file(500));
    write_file(dir / "gsm8k" / "test.jsonl", gsm8k_file(1319, 3));
    write_file(dir / "svamp" / "trainval.json", svamp_file(3138));
    write_file(dir / "svamp" / "test.json", svamp_file(1000, 11));
    write_file(dir / "aquarat" / "train.jsonl", aqua_file(full_aqua ? 97467 : 10));
    write_file(dir / "aquarat" / "dev.jsonl", aqua_file(254, 1));
    write_file(dir / "aquarat" / "test.jsonl", aqua_file(254, 2));
}

}  // namespace testutil
