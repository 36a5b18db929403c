#include "dnet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dnet/errors.hpp"
#include "dnet/rng.hpp"

namespace fs = std::filesystem;

namespace dnet {

namespace {

constexpr uint64_t kNoiseStream = 0x6e6f6973; // separate child stream for pixel noise

int irand(SeededRng& rng, int lo, int hi) { // inclusive bounds
    return lo + int(rng.next_below(uint64_t(hi - lo + 1)));
}

int stroke_value(SeededRng& rng) { return irand(rng, 0, 96); }

// ------------------------------------------------------------ rasteriser --

void plot_block(Image& img, int x, int y, int value, int t) {
    for (int dy = 0; dy < t; ++dy)
        for (int dx = 0; dx < t; ++dx) {
            const int px = x + dx, py = y + dy;
            if (px >= 0 && px < img.width && py >= 0 && py < img.height)
                img.px(px, py) = uint8_t(value);
        }
}

void draw_line(Image& img, int x0, int y0, int x1, int y1, int value, int t) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        plot_block(img, x0, y0, value, t);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, int value) {
    for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x)
            img.px(x, y) = uint8_t(value);
}

void draw_rect_outline(Image& img, int x0, int y0, int x1, int y1, int value, int t) {
    fill_rect(img, x0, y0, x1, y0 + t - 1, value);
    fill_rect(img, x0, y1 - t + 1, x1, y1, value);
    fill_rect(img, x0, y0, x0 + t - 1, y1, value);
    fill_rect(img, x1 - t + 1, y0, x1, y1, value);
}

void draw_dashed_vline(Image& img, int x, int y0, int y1, int value, int t) {
    // 4 px on / 4 px off
    for (int y = y0; y <= y1; ++y)
        if (((y - y0) / 4) % 2 == 0) plot_block(img, x, y, value, t);
}

void draw_circle_outline(Image& img, int cx, int cy, int r, int value, int t) {
    // midpoint circle
    int x = r, y = 0, err = 1 - r;
    while (x >= y) {
        const int pts[8][2] = {{cx + x, cy + y}, {cx - x, cy + y}, {cx + x, cy - y},
                               {cx - x, cy - y}, {cx + y, cy + x}, {cx - y, cy + x},
                               {cx + y, cy - x}, {cx - y, cy - x}};
        for (auto& p : pts) plot_block(img, p[0], p[1], value, t);
        ++y;
        if (err < 0) {
            err += 2 * y + 1;
        } else {
            --x;
            err += 2 * (y - x) + 1;
        }
    }
}

void fill_polygon(Image& img, const std::vector<std::pair<int, int>>& pts, int value) {
    if (pts.size() < 3) return;
    int ymin = pts[0].second, ymax = pts[0].second;
    for (auto& p : pts) {
        ymin = std::min(ymin, p.second);
        ymax = std::max(ymax, p.second);
    }
    ymin = std::max(ymin, 0);
    ymax = std::min(ymax, img.height - 1);
    std::vector<double> xs;
    for (int y = ymin; y <= ymax; ++y) {
        xs.clear();
        const double fy = double(y) + 0.5;
        for (size_t i = 0; i < pts.size(); ++i) {
            const auto [ax, ay] = pts[i];
            const auto [bx, by] = pts[(i + 1) % pts.size()];
            const double a = double(ay), b = double(by);
            if ((a <= fy && b > fy) || (b <= fy && a > fy)) {
                const double x = double(ax) + (fy - a) / (b - a) * double(bx - ax);
                xs.push_back(x);
            }
        }
        std::sort(xs.begin(), xs.end());
        for (size_t i = 0; i + 1 < xs.size(); i += 2) {
            const int x0 = std::max(0, int(std::ceil(xs[i] - 0.5)));
            const int x1 = std::min(img.width - 1, int(std::floor(xs[i + 1] - 0.5)));
            for (int x = x0; x <= x1; ++x) img.px(x, y) = uint8_t(value);
        }
    }
}

void fill_triangle(Image& img, int x0, int y0, int x1, int y1, int x2, int y2, int value) {
    fill_polygon(img, {{x0, y0}, {x1, y1}, {x2, y2}}, value);
}

void apply_salt_pepper(Image& img, double prob, uint64_t seed) {
    if (prob <= 0.0) return;
    SeededRng rng(seed);
    for (auto& px : img.pixels) {
        const double u = rng.uniform();
        if (u < prob) px = (u < prob * 0.5) ? 0 : 255;
    }
}

// ---------------------------------------------------------- class scenes --

struct BoxGeom {
    int x0, y0, x1, y1;
};

void add_class_box(SceneSpec& spec, SeededRng& rng, const BoxGeom& b) {
    const int value = stroke_value(rng);
    Element box{ElementType::box_outline, {b.x0, b.y0, b.x1, b.y1}, {}, value, 2};
    spec.elements.push_back(box);

    const int h = b.y1 - b.y0;
    const int div1 = b.y0 + int(std::lround(h * (0.22 + 0.12 * rng.uniform())));
    const int div2 = b.y0 + int(std::lround(h * (0.50 + 0.18 * rng.uniform())));
    for (int dy : {div1, div2}) {
        Element d{ElementType::divider, {b.x0 + 2, b.x1 - 2, dy}, {}, value, 2};
        spec.elements.push_back(d);
    }

    // pseudo-text: 1-4 short strokes per compartment, never full width
    const int inner_w = (b.x1 - 2) - (b.x0 + 4);
    const int sections[3][2] = {{b.y0 + 2, div1 - 1}, {div1 + 2, div2 - 1}, {div2 + 2, b.y1 - 2}};
    for (auto& sec : sections) {
        const int avail = sec[1] - sec[0];
        if (avail < 8) continue;
        const int n = std::min(irand(rng, 1, 4), avail / 6);
        for (int i = 0; i < std::max(1, n); ++i) {
            const int y = sec[0] + 3 + i * 6;
            if (y + 2 > sec[1]) break;
            const int len = std::max(6, int(std::lround(inner_w * (0.3 + 0.5 * rng.uniform()))));
            const int max_len = std::max(6, inner_w - 8);
            const int use = std::min(len, max_len);
            const int x0 = b.x0 + 4 + (use < max_len ? irand(rng, 0, std::min(4, max_len - use)) : 0);
            Element t{ElementType::text_stroke, {x0, x0 + use, y}, {}, stroke_value(rng), 2};
            spec.elements.push_back(t);
        }
    }
}

SceneSpec class_scene(uint64_t seed, int canvas) {
    SceneSpec spec{SceneKind::uml_class, canvas, seed, 0.01, {}};
    SeededRng rng(seed);

    // boxes live in a 3x2 cell grid; connectors only join adjacent cells so
    // they never cross a third box
    const int cols = 3, rows = 2;
    const int cw = canvas / cols, ch = canvas / rows;
    const int nboxes = irand(rng, 2, 6);
    std::vector<int> cells(size_t(cols * rows));
    for (size_t i = 0; i < cells.size(); ++i) cells[i] = int(i);
    for (size_t i = cells.size(); i > 1; --i)
        std::swap(cells[i - 1], cells[rng.next_below(uint64_t(i))]);
    cells.resize(size_t(nboxes));

    std::vector<int> box_of_cell(size_t(cols * rows), -1);
    std::vector<BoxGeom> boxes;
    for (int bi = 0; bi < nboxes; ++bi) {
        const int cell = cells[size_t(bi)];
        const int cx = (cell % cols) * cw, cy = (cell / cols) * ch;
        const int mx = irand(rng, 5, 10), my = irand(rng, 5, 12);
        const int maxw = cw - 2 * mx, maxh = ch - 2 * my;
        const int w = std::max(46, maxw - irand(rng, 0, std::max(0, maxw - 46)));
        const int h = std::max(60, maxh - irand(rng, 0, std::max(0, maxh - 60)));
        BoxGeom b;
        b.x0 = cx + mx + irand(rng, 0, std::max(0, maxw - w));
        b.y0 = cy + my + irand(rng, 0, std::max(0, maxh - h));
        b.x1 = b.x0 + w - 1;
        b.y1 = b.y0 + h - 1;
        box_of_cell[size_t(cell)] = bi;
        boxes.push_back(b);
        add_class_box(spec, rng, b);
    }

    // adjacent occupied cell pairs
    std::vector<std::array<int, 3>> pairs; // boxA, boxB, 0=horizontal 1=vertical
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int here = box_of_cell[size_t(r * cols + c)];
            if (here < 0) continue;
            if (c + 1 < cols && box_of_cell[size_t(r * cols + c + 1)] >= 0)
                pairs.push_back({here, box_of_cell[size_t(r * cols + c + 1)], 0});
            if (r + 1 < rows && box_of_cell[size_t((r + 1) * cols + c)] >= 0)
                pairs.push_back({here, box_of_cell[size_t((r + 1) * cols + c)], 1});
        }
    for (size_t i = pairs.size(); i > 1; --i)
        std::swap(pairs[i - 1], pairs[rng.next_below(uint64_t(i))]);
    const int nconn = std::min<int>(irand(rng, 1, 3), int(pairs.size()));
    for (int i = 0; i < nconn; ++i) {
        const auto [ia, ib, vertical] = pairs[size_t(i)];
        const BoxGeom &a = boxes[size_t(ia)], &b = boxes[size_t(ib)];
        const int value = stroke_value(rng);
        Element conn{ElementType::connector, {}, {}, value, 2};
        int tipx, tipy;
        if (!vertical) {
            conn.a = {a.x1, (a.y0 + a.y1) / 2, b.x0, (b.y0 + b.y1) / 2};
            tipx = b.x0;
            tipy = (b.y0 + b.y1) / 2;
        } else {
            conn.a = {(a.x0 + a.x1) / 2, a.y1, (b.x0 + b.x1) / 2, b.y0};
            tipx = (b.x0 + b.x1) / 2;
            tipy = b.y0;
        }
        spec.elements.push_back(conn);
        if (rng.uniform() < 0.5) {
            Element head{ElementType::arrow_head_hollow, {}, {}, value, 1};
            const int sz = 7;
            head.a = {tipx, tipy, vertical ? tipx : tipx - sz, vertical ? tipy - sz : tipy, sz, vertical};
            spec.elements.push_back(head);
        }
    }
    return spec;
}

// ------------------------------------------------------- sequence scenes --

SceneSpec sequence_scene(uint64_t seed, int canvas) {
    SceneSpec spec{SceneKind::uml_sequence, canvas, seed, 0.01, {}};
    SeededRng rng(seed);

    const int n = irand(rng, 2, 5);
    const int margin = 26;
    const double span = double(canvas - 2 * margin);
    std::vector<int> centers;
    int header_bottom = 0;
    for (int i = 0; i < n; ++i) {
        const int cx = margin + int(std::lround(span * (double(i) + 0.5) / double(n))) +
                       irand(rng, -5, 5);
        centers.push_back(cx);
        const int hw = irand(rng, 24, std::max(24, std::min(38, int(span) / n - 4)));
        const int hh = irand(rng, 16, 24);
        const int hy = irand(rng, 6, 14);
        const int value = stroke_value(rng);
        Element head{ElementType::box_outline,
                     {cx - hw / 2, hy, cx + hw / 2, hy + hh}, {}, value, 2};
        spec.elements.push_back(head);
        Element txt{ElementType::text_stroke,
                    {cx - hw / 2 + 4, cx + hw / 2 - 5, hy + hh / 2}, {}, value, 2};
        spec.elements.push_back(txt);
        const int y1 = canvas - irand(rng, 6, 14);
        Element life{ElementType::lifeline_dashed, {cx, hy + hh + 1, y1}, {}, value, 2};
        spec.elements.push_back(life);
        header_bottom = std::max(header_bottom, hy + hh);
    }

    const int nact = irand(rng, 0, 3);
    for (int i = 0; i < nact; ++i) {
        const int li = irand(rng, 0, n - 1);
        const int w = irand(rng, 6, 9);
        const int h = irand(rng, 16, 30);
        const int y0 = irand(rng, header_bottom + 8, canvas - h - 16);
        Element act{ElementType::activation_box,
                    {centers[size_t(li)] - w / 2, y0, centers[size_t(li)] + w / 2, y0 + h},
                    {},
                    stroke_value(rng),
                    2};
        spec.elements.push_back(act);
    }

    const int nmsg = irand(rng, 1, 6);
    for (int i = 0; i < nmsg; ++i) {
        int a = irand(rng, 0, n - 1);
        int b = irand(rng, 0, n - 2);
        if (b >= a) ++b; // distinct lifelines only
        const int y = irand(rng, header_bottom + 12, canvas - 20);
        Element msg{ElementType::message_arrow,
                    {centers[size_t(a)], centers[size_t(b)], y}, {}, stroke_value(rng), 2};
        spec.elements.push_back(msg);
    }
    return spec;
}

// --------------------------------------------------------- shapes scenes --

SceneSpec shapes_scene(int class_id, uint64_t seed, int canvas) {
    if (class_id < 0 || class_id > 3) throw ConfigError("shapes class id must be 0..3");
    SceneSpec spec{SceneKind(int(SceneKind::shapes_circles) + class_id), canvas, seed, 0.01, {}};
    SeededRng rng(seed);

    switch (class_id) {
    case 0: { // circles
        const int n = irand(rng, 3, 8);
        for (int i = 0; i < n; ++i) {
            const int r = irand(rng, 9, 56);
            const int cx = irand(rng, r + 2, canvas - r - 3);
            const int cy = irand(rng, r + 2, canvas - r - 3);
            const int value = stroke_value(rng);
            const int t = irand(rng, 1, 2);
            spec.elements.push_back({ElementType::circle_outline, {cx, cy, r}, {}, value, t});
            if (r > 18 && rng.uniform() < 0.3)
                spec.elements.push_back(
                    {ElementType::circle_outline, {cx, cy, r - 7}, {}, value, t});
        }
        break;
    }
    case 1: { // filled triangles
        const int n = irand(rng, 2, 6);
        for (int i = 0; i < n; ++i) {
            const int cx = irand(rng, 40, canvas - 41);
            const int cy = irand(rng, 40, canvas - 41);
            const double base = 6.283185307179586 * rng.uniform();
            Element tri{ElementType::triangle_filled, {}, {}, stroke_value(rng), 1};
            for (int v = 0; v < 3; ++v) {
                const double ang = base + 2.0943951 * v + 0.5 * (rng.uniform() - 0.5);
                const double rad = 18.0 + 50.0 * rng.uniform();
                tri.a[size_t(2 * v)] =
                    std::clamp(cx + int(std::lround(rad * std::cos(ang))), 1, canvas - 2);
                tri.a[size_t(2 * v + 1)] =
                    std::clamp(cy + int(std::lround(rad * std::sin(ang))), 1, canvas - 2);
            }
            spec.elements.push_back(tri);
        }
        break;
    }
    case 2: { // checkerboard / grid texture
        const bool checker = rng.next_below(2) == 0;
        const int cell = irand(rng, 9, 30);
        const int phase_x = irand(rng, 0, cell - 1), phase_y = irand(rng, 0, cell - 1);
        const int value = stroke_value(rng);
        if (checker) {
            for (int gy = -1; gy * cell - phase_y < canvas; ++gy)
                for (int gx = -1; gx * cell - phase_x < canvas; ++gx) {
                    if ((gx + gy) % 2) continue;
                    const int x0 = std::max(0, gx * cell - phase_x);
                    const int y0 = std::max(0, gy * cell - phase_y);
                    const int x1 = std::min(canvas - 1, gx * cell - phase_x + cell - 1);
                    const int y1 = std::min(canvas - 1, gy * cell - phase_y + cell - 1);
                    if (x1 < 0 || y1 < 0 || x0 > x1 || y0 > y1) continue;
                    spec.elements.push_back(
                        {ElementType::rect_filled, {x0, y0, x1, y1}, {}, value, 1});
                }
        } else {
            const int t = irand(rng, 1, 2);
            for (int x = cell - phase_x; x < canvas; x += cell)
                spec.elements.push_back(
                    {ElementType::grid_line, {x, 0, x, canvas - 1}, {}, value, t});
            for (int y = cell - phase_y; y < canvas; y += cell)
                spec.elements.push_back(
                    {ElementType::grid_line, {0, y, canvas - 1, y}, {}, value, t});
        }
        break;
    }
    case 3: { // polylines and blobs
        const int n = irand(rng, 2, 5);
        for (int i = 0; i < n; ++i) {
            Element line{ElementType::polyline_stroke, {}, {}, stroke_value(rng), 2};
            int x = irand(rng, 20, canvas - 21), y = irand(rng, 20, canvas - 21);
            line.pts.emplace_back(x, y);
            const int segs = irand(rng, 5, 14);
            for (int s = 0; s < segs; ++s) {
                const double ang = 6.283185307179586 * rng.uniform();
                const double len = 12.0 + 28.0 * rng.uniform();
                x = std::clamp(x + int(std::lround(len * std::cos(ang))), 2, canvas - 3);
                y = std::clamp(y + int(std::lround(len * std::sin(ang))), 2, canvas - 3);
                line.pts.emplace_back(x, y);
            }
            spec.elements.push_back(std::move(line));
        }
        const int nblob = irand(rng, 0, 3);
        for (int i = 0; i < nblob; ++i) {
            Element blob{ElementType::blob_filled, {}, {}, stroke_value(rng), 1};
            const int cx = irand(rng, 40, canvas - 41), cy = irand(rng, 40, canvas - 41);
            const double base_r = 12.0 + 22.0 * rng.uniform();
            const int nv = irand(rng, 7, 10);
            for (int v = 0; v < nv; ++v) {
                const double ang = 6.283185307179586 * double(v) / double(nv);
                const double rad = base_r * (0.7 + 0.6 * rng.uniform());
                blob.pts.emplace_back(
                    std::clamp(cx + int(std::lround(rad * std::cos(ang))), 1, canvas - 2),
                    std::clamp(cy + int(std::lround(rad * std::sin(ang))), 1, canvas - 2));
            }
            spec.elements.push_back(std::move(blob));
        }
        break;
    }
    }
    return spec;
}

} // namespace

SceneSpec make_class_scene(uint64_t seed, int canvas) { return class_scene(seed, canvas); }
SceneSpec make_sequence_scene(uint64_t seed, int canvas) { return sequence_scene(seed, canvas); }
SceneSpec make_shapes_scene(int class_id, uint64_t seed, int canvas) {
    return shapes_scene(class_id, seed, canvas);
}

Image render_scene(const SceneSpec& spec) {
    Image img(spec.canvas, spec.canvas, 1, 255);
    for (const auto& e : spec.elements) {
        switch (e.type) {
        case ElementType::box_outline:
            draw_rect_outline(img, e.a[0], e.a[1], e.a[2], e.a[3], e.value, e.thickness);
            break;
        case ElementType::divider:
        case ElementType::text_stroke:
            fill_rect(img, e.a[0], e.a[2], e.a[1], e.a[2] + e.thickness - 1, e.value);
            break;
        case ElementType::connector:
            draw_line(img, e.a[0], e.a[1], e.a[2], e.a[3], e.value, e.thickness);
            break;
        case ElementType::arrow_head_hollow: {
            const int tx = e.a[0], ty = e.a[1], sz = e.a[4];
            if (e.a[5]) { // vertical approach: base above the tip
                draw_line(img, tx, ty, tx - sz / 2 - 1, ty - sz, e.value, 1);
                draw_line(img, tx, ty, tx + sz / 2 + 1, ty - sz, e.value, 1);
                draw_line(img, tx - sz / 2 - 1, ty - sz, tx + sz / 2 + 1, ty - sz, e.value, 1);
            } else { // horizontal approach: base left of the tip
                draw_line(img, tx, ty, tx - sz, ty - sz / 2 - 1, e.value, 1);
                draw_line(img, tx, ty, tx - sz, ty + sz / 2 + 1, e.value, 1);
                draw_line(img, tx - sz, ty - sz / 2 - 1, tx - sz, ty + sz / 2 + 1, e.value, 1);
            }
            break;
        }
        case ElementType::lifeline_dashed:
            draw_dashed_vline(img, e.a[0], e.a[1], e.a[2], e.value, e.thickness);
            break;
        case ElementType::message_arrow: {
            draw_line(img, e.a[0], e.a[2], e.a[1], e.a[2], e.value, e.thickness);
            const int dir = e.a[1] > e.a[0] ? 1 : -1;
            fill_triangle(img, e.a[1], e.a[2], e.a[1] - dir * 7, e.a[2] - 4, e.a[1] - dir * 7,
                          e.a[2] + 5, e.value);
            break;
        }
        case ElementType::activation_box:
            fill_rect(img, e.a[0], e.a[1], e.a[2], e.a[3], 255);
            draw_rect_outline(img, e.a[0], e.a[1], e.a[2], e.a[3], e.value, e.thickness);
            break;
        case ElementType::circle_outline:
            draw_circle_outline(img, e.a[0], e.a[1], e.a[2], e.value, e.thickness);
            break;
        case ElementType::triangle_filled:
            fill_triangle(img, e.a[0], e.a[1], e.a[2], e.a[3], e.a[4], e.a[5], e.value);
            break;
        case ElementType::rect_filled:
            fill_rect(img, e.a[0], e.a[1], e.a[2], e.a[3], e.value);
            break;
        case ElementType::grid_line:
            draw_line(img, e.a[0], e.a[1], e.a[2], e.a[3], e.value, e.thickness);
            break;
        case ElementType::polyline_stroke:
            for (size_t i = 0; i + 1 < e.pts.size(); ++i)
                draw_line(img, e.pts[i].first, e.pts[i].second, e.pts[i + 1].first,
                          e.pts[i + 1].second, e.value, e.thickness);
            break;
        case ElementType::blob_filled:
            fill_polygon(img, e.pts, e.value);
            break;
        }
    }
    return img;
}

Image render_final(const SceneSpec& spec, int out_size) {
    Image img = render_scene(spec);
    if (out_size != spec.canvas) img = bilinear_resize(img, out_size, out_size);
    apply_salt_pepper(img, spec.noise_prob, child_seed(spec.seed, kNoiseStream));
    return img;
}

Image gen_class_diagram(uint64_t seed, int out_size) {
    return render_final(make_class_scene(seed), out_size);
}
Image gen_sequence_diagram(uint64_t seed, int out_size) {
    return render_final(make_sequence_scene(seed), out_size);
}
Image gen_source_scene(int class_id, uint64_t seed, int out_size) {
    return render_final(make_shapes_scene(class_id, seed), out_size);
}

const std::vector<std::string>& dataset_labels(DatasetKind kind) {
    static const std::vector<std::string> uml = {"class_diagram", "sequence_diagram"};
    static const std::vector<std::string> shapes = {"circles", "triangles", "grid", "blobs"};
    return kind == DatasetKind::uml ? uml : shapes;
}

DatasetManifest gen_dataset(DatasetKind kind, int64_t count, uint64_t seed,
                            const std::string& out_dir, int out_size) {
    if (count < 0) throw ConfigError("gen_dataset: negative count");
    fs::create_directories(out_dir);
    const auto& labels = dataset_labels(kind);

    DatasetManifest m;
    m.kind = kind == DatasetKind::uml ? "uml" : "shapes";
    m.count = count;
    m.seed = seed;
    m.canvas = out_size;

    char name[64];
    for (int64_t i = 0; i < count; ++i) {
        const int cls = int(i % int64_t(labels.size()));
        const uint64_t img_seed = child_seed(seed, uint64_t(i));
        std::snprintf(name, sizeof name, "%06lld_%s.pgm", (long long)i, labels[size_t(cls)].c_str());
        m.rows.push_back({name, labels[size_t(cls)], img_seed});
    }

    // rendering is per-image seeded, so any schedule gives identical bytes
    const int64_t chunk = 256;
    std::vector<Image> buf(size_t(std::min(chunk, std::max<int64_t>(count, 1))));
    for (int64_t base = 0; base < count; base += chunk) {
        const int64_t hi = std::min(count, base + chunk);
#pragma omp parallel for schedule(static)
        for (int64_t i = base; i < hi; ++i) {
            const int cls = int(i % int64_t(labels.size()));
            SceneSpec spec;
            if (kind == DatasetKind::uml)
                spec = cls == 0 ? make_class_scene(m.rows[size_t(i)].seed)
                                : make_sequence_scene(m.rows[size_t(i)].seed);
            else
                spec = make_shapes_scene(cls, m.rows[size_t(i)].seed);
            buf[size_t(i - base)] = render_final(spec, out_size);
        }
        for (int64_t i = base; i < hi; ++i)
            write_pnm(buf[size_t(i - base)], (fs::path(out_dir) / m.rows[size_t(i)].filename).string());
    }

    write_manifest(m, (fs::path(out_dir) / "manifest.csv").string());
    return m;
}

} // namespace dnet
