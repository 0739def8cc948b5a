"""Brute-force reference implementations in plain Python.

Nothing here calls into the package's numeric code; inputs are nested lists
of floats. The only shared object is the extractor's filter bank, which is a
parameter of the computation rather than part of it.
"""

import math

EPS = 1e-12


def norm(v):
    return math.sqrt(sum(x * x for x in v))


def cos(u, v):
    nu, nv = norm(u), norm(v)
    if nu < EPS or nv < EPS:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def mean_maps(maps):
    r, d = len(maps[0]), len(maps[0][0])
    out = [[0.0] * d for _ in range(r)]
    for m in maps:
        for i in range(r):
            for t in range(d):
                out[i][t] += m[i][t]
    return [[x / len(maps) for x in row] for row in out]


def weights(proto, query, omega, use_pow):
    expo = omega if use_pow else 1.0
    raw = []
    for v in query:
        s = 0.0
        for u in proto:
            c = cos(u, v)
            if c > 0:
                s += c ** expo
        raw.append(s)
    total = sum(raw)
    if total < EPS:
        return [1.0] * len(query)
    return [len(query) * x / total for x in raw]


def logit(proto, query, w, k, tau):
    total = 0.0
    for j, v in enumerate(query):
        sims = sorted((tau * cos(u, v) for u in proto), reverse=True)
        total += w[j] * sum(sims[:k])
    return total


def softmax(z):
    m = max(z)
    e = [math.exp(x - m) for x in z]
    s = sum(e)
    return [x / s for x in e]


def logits(protos, query, k, tau, omega=2.0, use_weight=True, use_pow=True):
    out = []
    for p in protos:
        w = weights(p, query, omega, use_pow) if use_weight else [1.0] * len(query)
        out.append(logit(p, query, w, k, tau))
    return out


def classify(protos, query, k, tau, omega=2.0, use_weight=True, use_pow=True):
    return softmax(logits(protos, query, k, tau, omega, use_weight, use_pow))


def cross_entropy(logit_rows, labels):
    total = 0.0
    for z, y in zip(logit_rows, labels):
        m = max(z)
        lse = m + math.log(sum(math.exp(x - m) for x in z))
        total += lse - z[y]
    return total / len(labels)


# -- image side -------------------------------------------------------------

def resize(img, th, tw):
    """Corner-aligned bilinear; ``img`` is [row][col][channel]."""
    h, w, c = len(img), len(img[0]), len(img[0][0])
    out = []
    for y in range(th):
        sy = y * (h - 1) / (th - 1) if th > 1 else 0.0
        y0 = min(int(math.floor(sy)), h - 1)
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        row = []
        for x in range(tw):
            sx = x * (w - 1) / (tw - 1) if tw > 1 else 0.0
            x0 = min(int(math.floor(sx)), w - 1)
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            px = []
            for ch in range(c):
                top = img[y0][x0][ch] * (1 - fx) + img[y0][x1][ch] * fx
                bot = img[y1][x0][ch] * (1 - fx) + img[y1][x1][ch] * fx
                px.append(min(1.0, max(0.0, top * (1 - fy) + bot * fy)))
            row.append(px)
        out.append(row)
    return out


def conv_relu_pool(x, filt, stride):
    """``x`` is [channel][row][col]; ``filt`` is nested [out][in][3][3]."""
    c_in, h, w = len(x), len(x[0]), len(x[0][0])
    conv = []
    for f in filt:
        plane = []
        for y in range(h):
            row = []
            for xx in range(w):
                s = 0.0
                for ci in range(c_in):
                    for dy in range(3):
                        yy = y + dy - 1
                        if yy < 0 or yy >= h:
                            continue
                        for dx in range(3):
                            xs = xx + dx - 1
                            if 0 <= xs < w:
                                s += f[ci][dy][dx] * x[ci][yy][xs]
                row.append(max(0.0, s))
            plane.append(row)
        conv.append(plane)
    h2, w2 = h // stride, w // stride
    out = []
    for plane in conv:
        out.append([
            [sum(plane[a * stride + i][b * stride + j]
                 for i in range(stride) for j in range(stride)) / (stride * stride)
             for b in range(w2)]
            for a in range(h2)
        ])
    return out


def extract(img, filters, strides):
    """Returns (w, h, rows) with rows in row-major cell order."""
    x = [[[img[y][xx][ch] for xx in range(len(img[0]))] for y in range(len(img))]
         for ch in range(len(img[0][0]))]
    for filt, s in zip(filters, strides):
        x = conv_relu_pool(x, filt, s)
    h, w = len(x[0]), len(x[0][0])
    rows = [[x[t][y][xx] for t in range(len(x))] for y in range(h) for xx in range(w)]
    return w, h, rows


def pool(rows, w, h, tw, th):
    d = len(rows[0])
    out = []
    for a in range(th):
        y0, y1 = a * h // th, (a + 1) * h // th
        for b in range(tw):
            x0, x1 = b * w // tw, (b + 1) * w // tw
            cells = [rows[y * w + x] for y in range(y0, y1) for x in range(x0, x1)]
            out.append([sum(c[t] for c in cells) / len(cells) for t in range(d)])
    return out
