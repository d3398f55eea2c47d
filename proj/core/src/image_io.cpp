#include "qpmseg/image_io.hpp"

#include "qpmseg/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace qpmseg {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "image codecs assume a little-endian host");

std::vector<char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open file: " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<char> data(static_cast<std::size_t>(size));
    if (size > 0) in.read(data.data(), size);
    if (!in) throw LoadError("cannot read file: " + path.string());
    return data;
}

// ---- raw + sidecar -------------------------------------------------------

PhaseImage load_raw(const std::filesystem::path& path, const Calibration& cal) {
    const std::filesystem::path sidecar = path.string() + ".json";
    std::ifstream hdr_in(sidecar);
    if (!hdr_in) throw LoadError("missing sidecar header: " + sidecar.string());
    json hdr;
    try {
        hdr_in >> hdr;
    } catch (const json::exception& e) {
        throw LoadError("sidecar " + sidecar.string() + ": " + e.what());
    }

    auto field = [&](const char* key) -> const json& {
        auto it = hdr.find(key);
        if (it == hdr.end()) throw LoadError("sidecar " + sidecar.string() + ": missing '" + key + "'");
        return *it;
    };
    const int width = field("width").get<int>();
    const int height = field("height").get<int>();
    const std::string dtype = field("dtype").get<std::string>();
    const std::string endianness = field("endianness").get<std::string>();
    if (endianness != "little") {
        throw LoadError("sidecar " + sidecar.string() + ": only little-endian data is supported");
    }
    if (width < 1 || height < 1) {
        throw LoadError("sidecar " + sidecar.string() + ": bad dimensions");
    }

    const double pixel_size = cal.pixel_size_um.value_or(field("pixel_size_um").get<double>());
    const double wavelength = cal.wavelength_nm.value_or(field("wavelength_nm").get<double>());

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const std::vector<char> data = read_file(path);
    std::vector<float> phase(n);
    if (dtype == "float32") {
        if (data.size() != n * 4) {
            throw LoadError(path.string() + ": expected " + std::to_string(n * 4) +
                            " bytes, got " + std::to_string(data.size()));
        }
        std::memcpy(phase.data(), data.data(), data.size());
    } else if (dtype == "float64") {
        if (data.size() != n * 8) {
            throw LoadError(path.string() + ": expected " + std::to_string(n * 8) +
                            " bytes, got " + std::to_string(data.size()));
        }
        std::vector<double> wide(n);
        std::memcpy(wide.data(), data.data(), data.size());
        for (std::size_t i = 0; i < n; ++i) phase[i] = static_cast<float>(wide[i]);
    } else {
        throw LoadError(path.string() + ": unsupported dtype '" + dtype + "'");
    }
    return PhaseImage(path.stem().string(), width, height, std::move(phase), pixel_size,
                      wavelength);
}

// ---- minimal TIFF codec --------------------------------------------------
// Supports exactly the variant this project writes: classic little-endian
// TIFF, one sample per pixel, 32-bit IEEE float, uncompressed strips.

constexpr std::uint16_t kTagWidth = 256;
constexpr std::uint16_t kTagHeight = 257;
constexpr std::uint16_t kTagBitsPerSample = 258;
constexpr std::uint16_t kTagCompression = 259;
constexpr std::uint16_t kTagPhotometric = 262;
constexpr std::uint16_t kTagStripOffsets = 273;
constexpr std::uint16_t kTagSamplesPerPixel = 277;
constexpr std::uint16_t kTagRowsPerStrip = 278;
constexpr std::uint16_t kTagStripByteCounts = 279;
constexpr std::uint16_t kTagSampleFormat = 339;

constexpr std::uint16_t kTypeShort = 3;
constexpr std::uint16_t kTypeLong = 4;

struct TiffReader {
    const std::vector<char>& data;
    std::string name;

    template <typename T> T at(std::size_t offset) const {
        if (offset + sizeof(T) > data.size()) throw LoadError(name + ": truncated TIFF");
        T v;
        std::memcpy(&v, data.data() + offset, sizeof(T));
        return v;
    }
};

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint32_t value_or_offset = 0;
};

PhaseImage load_tiff(const std::filesystem::path& path, const Calibration& cal) {
    if (!cal.pixel_size_um || !cal.wavelength_nm) {
        throw LoadError(path.string() +
                        ": TIFF carries no calibration; pass pixel size and wavelength");
    }
    const std::vector<char> data = read_file(path);
    TiffReader r{data, path.string()};

    if (data.size() < 8) throw LoadError(r.name + ": not a TIFF file");
    if (data[0] == 'M' && data[1] == 'M') {
        throw LoadError(r.name + ": big-endian TIFF is not supported");
    }
    if (data[0] != 'I' || data[1] != 'I' || r.at<std::uint16_t>(2) != 42) {
        throw LoadError(r.name + ": not a TIFF file");
    }

    const auto ifd_offset = r.at<std::uint32_t>(4);
    const auto n_entries = r.at<std::uint16_t>(ifd_offset);
    std::map<std::uint16_t, TiffEntry> entries;
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        const std::size_t base = ifd_offset + 2 + static_cast<std::size_t>(i) * 12;
        const auto tag = r.at<std::uint16_t>(base);
        entries[tag] = {r.at<std::uint16_t>(base + 2), r.at<std::uint32_t>(base + 4),
                        r.at<std::uint32_t>(base + 8)};
    }

    auto scalar = [&](std::uint16_t tag, std::optional<std::uint32_t> fallback =
                                             std::nullopt) -> std::uint32_t {
        auto it = entries.find(tag);
        if (it == entries.end()) {
            if (fallback) return *fallback;
            throw LoadError(r.name + ": missing TIFF tag " + std::to_string(tag));
        }
        const TiffEntry& e = it->second;
        if (e.count != 1) throw LoadError(r.name + ": TIFF tag " + std::to_string(tag) +
                                          " has unexpected count");
        // Inline values are left-justified in the 4-byte field.
        return e.type == kTypeShort ? (e.value_or_offset & 0xffffu) : e.value_or_offset;
    };
    auto array = [&](std::uint16_t tag) -> std::vector<std::uint32_t> {
        const TiffEntry& e = entries.at(tag);
        std::vector<std::uint32_t> out(e.count);
        if (e.count == 1) {
            out[0] = e.type == kTypeShort ? (e.value_or_offset & 0xffffu) : e.value_or_offset;
            return out;
        }
        for (std::uint32_t i = 0; i < e.count; ++i) {
            out[i] = e.type == kTypeShort
                         ? r.at<std::uint16_t>(e.value_or_offset + 2u * i)
                         : r.at<std::uint32_t>(e.value_or_offset + 4u * i);
        }
        return out;
    };

    const auto width = static_cast<int>(scalar(kTagWidth));
    const auto height = static_cast<int>(scalar(kTagHeight));
    if (scalar(kTagCompression, 1u) != 1u) {
        throw LoadError(r.name + ": only uncompressed TIFF is supported");
    }
    if (scalar(kTagSamplesPerPixel, 1u) != 1u) {
        throw LoadError(r.name + ": only single-channel TIFF is supported");
    }
    if (scalar(kTagBitsPerSample) != 32u || scalar(kTagSampleFormat, 1u) != 3u) {
        throw LoadError(r.name + ": only 32-bit IEEE float samples are supported");
    }
    if (entries.find(kTagStripOffsets) == entries.end() ||
        entries.find(kTagStripByteCounts) == entries.end()) {
        throw LoadError(r.name + ": missing strip layout");
    }

    const std::vector<std::uint32_t> offsets = array(kTagStripOffsets);
    const std::vector<std::uint32_t> counts = array(kTagStripByteCounts);
    if (offsets.size() != counts.size()) throw LoadError(r.name + ": inconsistent strip layout");

    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<float> phase(n);
    std::size_t written = 0;
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        if (counts[s] % 4 != 0) throw LoadError(r.name + ": strip size not float-aligned");
        const std::size_t n_values = counts[s] / 4;
        if (written + n_values > n) throw LoadError(r.name + ": strip data exceeds image size");
        if (offsets[s] + counts[s] > data.size()) throw LoadError(r.name + ": truncated TIFF");
        std::memcpy(phase.data() + written, data.data() + offsets[s], counts[s]);
        written += n_values;
    }
    if (written != n) throw LoadError(r.name + ": strip data smaller than image");

    return PhaseImage(path.stem().string(), width, height, std::move(phase), *cal.pixel_size_um,
                      *cal.wavelength_nm);
}

void append_u16(std::vector<char>& out, std::uint16_t v) {
    out.insert(out.end(), reinterpret_cast<const char*>(&v), reinterpret_cast<const char*>(&v) + 2);
}
void append_u32(std::vector<char>& out, std::uint32_t v) {
    out.insert(out.end(), reinterpret_cast<const char*>(&v), reinterpret_cast<const char*>(&v) + 4);
}
void append_entry(std::vector<char>& out, std::uint16_t tag, std::uint16_t type,
                  std::uint32_t count, std::uint32_t value) {
    append_u16(out, tag);
    append_u16(out, type);
    append_u32(out, count);
    append_u32(out, value);
}

} // namespace

PhaseImage load_image(const std::filesystem::path& path, const Calibration& cal) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".raw") return load_raw(path, cal);
    if (ext == ".tif" || ext == ".tiff") return load_tiff(path, cal);
    throw LoadError(path.string() + ": unknown image format '" + ext + "'");
}

void save_raw(const PhaseImage& img, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(img.samples().data()),
                  static_cast<std::streamsize>(img.samples().size() * sizeof(float)));
        if (!out) throw Error("write failed: " + path.string());
    }
    json hdr{{"width", img.width()},
             {"height", img.height()},
             {"dtype", "float32"},
             {"pixel_size_um", img.pixel_size_um()},
             {"wavelength_nm", img.wavelength_nm()},
             {"endianness", "little"}};
    std::ofstream hdr_out(path.string() + ".json");
    if (!hdr_out) throw Error("cannot write " + path.string() + ".json");
    hdr_out << hdr.dump(2) << "\n";
}

void save_tiff(const PhaseImage& img, const std::filesystem::path& path) {
    const std::uint32_t n_bytes =
        static_cast<std::uint32_t>(img.samples().size() * sizeof(float));
    std::vector<char> out;
    out.reserve(8 + n_bytes + 2 + 10 * 12 + 4);

    out.push_back('I');
    out.push_back('I');
    append_u16(out, 42);
    const std::uint32_t data_offset = 8;
    append_u32(out, data_offset + n_bytes); // IFD follows the pixel data
    out.insert(out.end(), reinterpret_cast<const char*>(img.samples().data()),
               reinterpret_cast<const char*>(img.samples().data()) + n_bytes);

    append_u16(out, 10); // entry count
    append_entry(out, kTagWidth, kTypeLong, 1, static_cast<std::uint32_t>(img.width()));
    append_entry(out, kTagHeight, kTypeLong, 1, static_cast<std::uint32_t>(img.height()));
    append_entry(out, kTagBitsPerSample, kTypeShort, 1, 32);
    append_entry(out, kTagCompression, kTypeShort, 1, 1);
    append_entry(out, kTagPhotometric, kTypeShort, 1, 1);
    append_entry(out, kTagStripOffsets, kTypeLong, 1, data_offset);
    append_entry(out, kTagSamplesPerPixel, kTypeShort, 1, 1);
    append_entry(out, kTagRowsPerStrip, kTypeLong, 1, static_cast<std::uint32_t>(img.height()));
    append_entry(out, kTagStripByteCounts, kTypeLong, 1, n_bytes);
    append_entry(out, kTagSampleFormat, kTypeShort, 1, 3);
    append_u32(out, 0); // no further IFD

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("write failed: " + path.string());
}

std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".raw" || ext == ".tif" || ext == ".tiff") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace qpmseg
