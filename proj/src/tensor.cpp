#include "owsol/tensor.hpp"

#include <cstdio>
#include <memory>

#include "owsol/errors.hpp"

namespace owsol {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32le(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    if (std::fwrite(b, 1, 4, f) != 4) throw IoError("short write");
}

std::uint32_t get_u32le(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw IoError("short read");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_owt(const std::string& path, const Tensor& t) {
    if (!t.shape_valid()) throw IoError("tensor shape/data mismatch writing " + path);
    std::string tmp = path + ".tmp";
    {
        FilePtr f(std::fopen(tmp.c_str(), "wb"));
        if (!f) throw IoError("cannot open for write: " + tmp);
        const char magic[4] = {'O', 'W', 'T', '1'};
        if (std::fwrite(magic, 1, 4, f.get()) != 4) throw IoError("short write: " + tmp);
        unsigned char ndim = static_cast<unsigned char>(t.dims.size());
        if (std::fwrite(&ndim, 1, 1, f.get()) != 1) throw IoError("short write: " + tmp);
        for (auto d : t.dims) put_u32le(f.get(), d);
        // Payload assumes little-endian float32 host, matching the format.
        if (!t.data.empty() &&
            std::fwrite(t.data.data(), sizeof(float), t.data.size(), f.get()) !=
                t.data.size())
            throw IoError("short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename " + tmp + " -> " + path);
}

Tensor read_owt(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open for read: " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || magic[0] != 'O' || magic[1] != 'W' ||
        magic[2] != 'T' || magic[3] != '1')
        throw IoError("bad OWT1 magic in " + path);
    unsigned char ndim = 0;
    if (std::fread(&ndim, 1, 1, f.get()) != 1) throw IoError("short read: " + path);
    Tensor t;
    t.dims.resize(ndim);
    for (auto& d : t.dims) d = get_u32le(f.get());
    t.data.resize(t.element_count());
    if (!t.data.empty() &&
        std::fread(t.data.data(), sizeof(float), t.data.size(), f.get()) != t.data.size())
        throw IoError("short read: " + path);
    return t;
}

} // namespace owsol
