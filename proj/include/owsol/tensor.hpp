#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace owsol {

// Dense row-major float32 tensor. The on-disk form is OWT1:
//   'O' 'W' 'T' '1' | u8 ndim | ndim x u32le extents | f32le payload.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    static Tensor zeros(std::vector<std::uint32_t> d) {
        Tensor t;
        t.dims = std::move(d);
        t.data.assign(t.element_count(), 0.0f);
        return t;
    }

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto e : dims) n *= e;
        return dims.empty() ? 0 : n;
    }

    bool shape_valid() const { return element_count() == data.size(); }
};

void write_owt(const std::string& path, const Tensor& t);
Tensor read_owt(const std::string& path);

} // namespace owsol
