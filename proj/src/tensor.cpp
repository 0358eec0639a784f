#include "mvxray/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "mvxray/binary_io.hpp"
#include "mvxray/errors.hpp"

namespace mvx {

Tensor::Tensor(std::vector<std::size_t> dims, double fill) : dims_(std::move(dims))
{
    const std::size_t n =
        std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    data_.assign(n, fill);
}

bool Tensor::all_finite() const
{
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double dot(const Tensor& a, const Tensor& b)
{
    if (a.dims() != b.dims()) throw ShapeError("dot: tensor shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void write_tensor(std::ostream& os, const Tensor& t)
{
    if (t.rank() > 255) throw FormatError("tensor rank exceeds 255");
    os.write("MXT1", 4);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.dims()) {
        if (d > std::numeric_limits<std::uint32_t>::max()) throw FormatError("tensor dim too large");
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    }
    for (double v : t.data()) detail::put_f32(os, static_cast<float>(v));
    if (!os) throw Error("failed writing tensor");
}

Tensor read_tensor(std::istream& is)
{
    detail::expect_magic(is, "MXT1");
    const auto rank = detail::get_le<std::uint8_t>(is);
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = detail::get_le<std::uint32_t>(is);
    Tensor t(std::move(dims));
    for (double& v : t.data()) v = detail::get_f32(is);
    return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_tensor(os, t);
}

Tensor load_tensor(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_tensor(is);
}

}  // namespace mvx
