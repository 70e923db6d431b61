#pragma once

#include <optional>
#include <string>
#include <vector>

#include "advforge/geometry.hpp"
#include "advforge/image.hpp"
#include "advforge/sample.hpp"

namespace advforge {

/// One dataset entry; paths are relative to the manifest's directory.
struct ManifestRecord {
    std::string image;
    std::string landmarks;
    Category category = Category::Pristine;        // pristine | dataset_forgery
    std::optional<std::string> gt_mask;            // present iff dataset_forgery
};

struct DatasetManifest {
    int version = 1;
    std::vector<ManifestRecord> records;
    std::string root_dir;  // directory the relative paths resolve against

    std::vector<std::size_t> forgery_indices() const;
    std::vector<std::size_t> pristine_indices() const;
};

/// JSON-lines file: a header object then one record object per line.
void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

struct LoadedSample {
    Image image;
    LandmarkSet landmarks;
    Category category = Category::Pristine;
    std::optional<Mask> gt_mask;
};

LoadedSample load_sample(const DatasetManifest& manifest, const ManifestRecord& record);

/// FNV-1a 64 over the manifest file bytes; echoed in training manifests so a
/// run can be tied to the exact dataset it saw.
std::string manifest_content_hash(const std::string& path);

}  // namespace advforge
