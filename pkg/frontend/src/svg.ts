/**
 * Minimal deterministic SVG construction: linear/log scales, axes, and the
 * marker vocabulary used across the figures (estimator -> marker shape).
 * String output only, so renders are byte-stable for a given input.
 */

export interface Margin {
    top: number;
    right: number;
    bottom: number;
    left: number;
}

export const DEFAULT_MARGIN: Margin = { top: 36, right: 18, bottom: 44, left: 58 };

export interface Scale {
    (v: number): number;
    ticks(): number[];
    domain: [number, number];
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
    if (!(hi > lo)) return [lo];
    const span = hi - lo;
    const step = Math.pow(10, Math.floor(Math.log10(span / count)));
    const err = (span / count) / step;
    const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
    const s = step * mult;
    const start = Math.ceil(lo / s) * s;
    const out: number[] = [];
    for (let v = start; v <= hi + 1e-12 * span; v += s) out.push(Number(v.toPrecision(12)));
    return out;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
    const [d0, d1] = domain;
    const [r0, r1] = range;
    const f = ((v: number) => r0 + ((v - d0) / (d1 - d0 || 1)) * (r1 - r0)) as Scale;
    f.ticks = () => niceTicks(d0, d1);
    f.domain = domain;
    return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
    const lo = Math.log10(domain[0]);
    const hi = Math.log10(domain[1]);
    const [r0, r1] = range;
    const f = ((v: number) => r0 + ((Math.log10(v) - lo) / (hi - lo || 1)) * (r1 - r0)) as Scale;
    f.ticks = () => {
        const out: number[] = [];
        for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) out.push(Math.pow(10, e));
        return out.length >= 2 ? out : [domain[0], domain[1]];
    };
    f.domain = domain;
    return f;
}

export function fmt(v: number): string {
    if (v === 0) return '0';
    const a = Math.abs(v);
    if (a >= 0.01 && a < 10000) return String(Number(v.toPrecision(6)));
    return v.toExponential(1);
}

/** Marker path centered at (x, y); shape vocabulary matches the study's
 * estimator encoding: circle, square, triangle, diamond. */
export function marker(shape: string, x: number, y: number, size: number, color: string): string {
    const s = size;
    const attrs = `fill="${color}" stroke="white" stroke-width="0.6"`;
    switch (shape) {
        case 'square':
            return `<rect x="${fmt(x - s)}" y="${fmt(y - s)}" width="${fmt(2 * s)}" height="${fmt(2 * s)}" ${attrs}/>`;
        case 'triangle':
            return `<polygon points="${fmt(x)},${fmt(y - s)} ${fmt(x - s)},${fmt(y + s)} ${fmt(x + s)},${fmt(y + s)}" ${attrs}/>`;
        case 'diamond':
            return `<polygon points="${fmt(x)},${fmt(y - s)} ${fmt(x + s)},${fmt(y)} ${fmt(x)},${fmt(y + s)} ${fmt(x - s)},${fmt(y)}" ${attrs}/>`;
        default:
            return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(s)}" ${attrs}/>`;
    }
}

export const ESTIMATOR_STYLE: Record<string, { shape: string; color: string; label: string }> = {
    dcdr_known: { shape: 'circle', color: '#111111', label: 'DCDR known density' },
    dcdr_lpr: { shape: 'square', color: '#e08214', label: 'DCDR local polynomial' },
    scdr_mse: { shape: 'triangle', color: '#2166ac', label: 'SCDR-MSE' },
    dcdr: { shape: 'square', color: '#1b7837', label: 'DCDR' },
    scdr: { shape: 'diamond', color: '#2166ac', label: 'SCDR' },
    mu: { shape: 'circle', color: '#e08214', label: 'outcome fit' },
    pi: { shape: 'triangle', color: '#111111', label: 'exposure fit' },
};

export function styleFor(estimator: string) {
    return ESTIMATOR_STYLE[estimator] ?? { shape: 'circle', color: '#777777', label: estimator };
}

export interface Panel {
    x: Scale;
    y: Scale;
    content: string[];
    origin: [number, number];
    width: number;
    height: number;
    title: string;
}

export function axes(p: Panel, xLabel: string, yLabel: string): string {
    const [ox, oy] = p.origin;
    const parts: string[] = [];
    const x0 = ox;
    const x1 = ox + p.width;
    const y0 = oy + p.height;
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333" stroke-width="1"/>`);
    parts.push(`<line x1="${x0}" y1="${oy}" x2="${x0}" y2="${y0}" stroke="#333" stroke-width="1"/>`);
    for (const t of p.x.ticks()) {
        const px = p.x(t);
        parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 4}" stroke="#333"/>`);
        parts.push(`<text x="${fmt(px)}" y="${y0 + 16}" font-size="10" text-anchor="middle">${fmt(t)}</text>`);
    }
    for (const t of p.y.ticks()) {
        const py = p.y(t);
        parts.push(`<line x1="${x0 - 4}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#333"/>`);
        parts.push(`<text x="${x0 - 6}" y="${fmt(py + 3)}" font-size="10" text-anchor="end">${fmt(t)}</text>`);
    }
    parts.push(`<text x="${fmt(ox + p.width / 2)}" y="${y0 + 32}" font-size="11" text-anchor="middle">${xLabel}</text>`);
    parts.push(
        `<text x="${x0 - 42}" y="${fmt(oy + p.height / 2)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${x0 - 42} ${fmt(oy + p.height / 2)})">${yLabel}</text>`
    );
    parts.push(`<text x="${fmt(ox + p.width / 2)}" y="${oy - 8}" font-size="12" font-weight="bold" text-anchor="middle">${p.title}</text>`);
    return parts.join('\n');
}

export function document(width: number, height: number, body: string): string {
    return [
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
        `<rect width="${width}" height="${height}" fill="white"/>`,
        body,
        `</svg>`,
        '',
    ].join('\n');
}
