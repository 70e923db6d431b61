#include "advforge/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "advforge/png_io.hpp"

namespace advforge {

namespace fs = std::filesystem;
using nlohmann::json;

static constexpr const char* kManifestFormat = "toyface-dataset";

std::vector<std::size_t> DatasetManifest::forgery_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].category == Category::DatasetForgery) out.push_back(i);
    return out;
}

std::vector<std::size_t> DatasetManifest::pristine_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].category == Category::Pristine) out.push_back(i);
    return out;
}

static void validate_record(const ManifestRecord& r, std::size_t line) {
    auto fail = [&](const std::string& field, const std::string& why) {
        throw std::runtime_error("manifest record " + std::to_string(line) + ": field '" + field +
                                 "' " + why);
    };
    if (r.image.empty()) fail("image", "missing");
    if (r.landmarks.empty()) fail("landmarks", "missing");
    if (r.category == Category::Synthesized)
        fail("category", "manifest records must be pristine or dataset_forgery");
    if (r.category == Category::Pristine && r.gt_mask.has_value())
        fail("gt_mask", "must be absent for pristine records");
    if (r.category == Category::DatasetForgery && !r.gt_mask.has_value())
        fail("gt_mask", "required for dataset_forgery records");
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_manifest: cannot open '" + path + "'");
    json header;
    header["format"] = kManifestFormat;
    header["version"] = manifest.version;
    f << header.dump() << "\n";
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& r = manifest.records[i];
        validate_record(r, i + 1);
        json j;
        j["image"] = r.image;
        j["landmarks"] = r.landmarks;
        j["category"] = category_name(r.category);
        if (r.gt_mask) j["gt_mask"] = *r.gt_mask;
        f << j.dump() << "\n";
    }
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_manifest: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_manifest: '" + path + "' is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error("load_manifest: bad header line: " + std::string(e.what()));
    }
    if (header.value("format", "") != kManifestFormat)
        throw std::runtime_error("load_manifest: '" + path + "' is not a " + kManifestFormat +
                                 " manifest");
    DatasetManifest m;
    m.version = header.value("version", 0);
    if (m.version != 1)
        throw std::runtime_error("load_manifest: unsupported manifest version " +
                                 std::to_string(m.version));
    m.root_dir = fs::path(path).parent_path().string();
    if (m.root_dir.empty()) m.root_dir = ".";
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("load_manifest: line " + std::to_string(line_no) +
                                     " is not valid JSON: " + e.what());
        }
        ManifestRecord r;
        if (!j.contains("image") || !j["image"].is_string())
            throw std::runtime_error("manifest record " + std::to_string(line_no - 1) +
                                     ": field 'image' missing or not a string");
        r.image = j["image"].get<std::string>();
        if (!j.contains("landmarks") || !j["landmarks"].is_string())
            throw std::runtime_error("manifest record " + std::to_string(line_no - 1) +
                                     ": field 'landmarks' missing or not a string");
        r.landmarks = j["landmarks"].get<std::string>();
        if (!j.contains("category") || !j["category"].is_string())
            throw std::runtime_error("manifest record " + std::to_string(line_no - 1) +
                                     ": field 'category' missing or not a string");
        r.category = category_from_name(j["category"].get<std::string>());
        if (j.contains("gt_mask")) r.gt_mask = j["gt_mask"].get<std::string>();
        validate_record(r, line_no - 1);
        m.records.push_back(std::move(r));
    }
    return m;
}

LoadedSample load_sample(const DatasetManifest& manifest, const ManifestRecord& record) {
    LoadedSample s;
    s.category = record.category;
    s.image = read_png_rgb((fs::path(manifest.root_dir) / record.image).string());
    s.landmarks = read_landmarks((fs::path(manifest.root_dir) / record.landmarks).string());
    validate_landmarks(s.landmarks, s.image.rows(), s.image.cols(), 0.0);
    if (record.gt_mask) {
        Mask m = read_png_gray((fs::path(manifest.root_dir) / *record.gt_mask).string());
        if (m.rows() != s.image.rows() || m.cols() != s.image.cols())
            throw std::runtime_error("load_sample: gt mask shape mismatch for '" + record.image + "'");
        s.gt_mask = std::move(m);
    }
    return s;
}

std::string manifest_content_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("manifest_content_hash: cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace advforge
