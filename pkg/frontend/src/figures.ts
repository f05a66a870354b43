/**
 * Figure renderers for the study's CSV outputs.
 *
 * Five kinds, one per result schema:
 *   qq              — standardized-statistic QQ panels vs the y = x diagonal
 *   optimal-k       — MSE-optimal neighbor count against fold size
 *   coverage        — Wald interval coverage with binomial error bars and
 *                     the nominal 0.95 reference line
 *   bvm             — squared bias / variance / MSE panels (log y)
 *   holder-examples — sampled smoothness-controlled example functions
 *
 * Rendering is pure string assembly: same input bytes, same output bytes.
 */

import { distinct, num, readCsv, Row } from './csv.js';
import {
    DEFAULT_MARGIN,
    Panel,
    axes,
    document,
    fmt,
    linearScale,
    logScale,
    marker,
    styleFor,
} from './svg.js';

export type FigureKind = 'qq' | 'optimal-k' | 'coverage' | 'bvm' | 'holder-examples';

export interface FigureRequest {
    kind: FigureKind;
    input: string;
    output: string;
    cell?: string;
    estimator?: string;
}

const PANEL_W = 240;
const PANEL_H = 200;
const GAP_X = 70;
const GAP_Y = 66;

/** Log-scale domain; a single distinct value gets a symmetric window so
 * the axis stays readable. */
function logDomain(values: number[]): [number, number] {
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    if (lo === hi) return [lo / 1.5, hi * 1.5];
    return [lo, hi];
}

function panelGrid(count: number, perRow = 3): { cols: number; rows: number } {
    const cols = Math.min(perRow, Math.max(1, count));
    return { cols, rows: Math.ceil(count / cols) };
}

function panelOrigin(i: number, cols: number): [number, number] {
    const col = i % cols;
    const row = Math.floor(i / cols);
    return [DEFAULT_MARGIN.left + col * (PANEL_W + GAP_X), DEFAULT_MARGIN.top + row * (PANEL_H + GAP_Y)];
}

function legend(estimators: string[], x: number, y: number): { svg: string; width: number } {
    const parts: string[] = [];
    let off = 0;
    for (const est of estimators) {
        const st = styleFor(est);
        parts.push(marker(st.shape, x + off, y, 4, st.color));
        parts.push(`<text x="${x + off + 8}" y="${y + 3}" font-size="10">${st.label}</text>`);
        off += st.label.length * 5.4 + 30;
    }
    return { svg: parts.join('\n'), width: x + off };
}

function filterRows(rows: Row[], req: FigureRequest): Row[] {
    let out = rows;
    if (req.cell) out = out.filter((r) => r.cell === req.cell);
    if (req.estimator) out = out.filter((r) => r.estimator === req.estimator);
    return out;
}

// ---------------------------------------------------------------- qq panels

export function renderQq(rows: Row[], req: FigureRequest): string {
    rows = filterRows(rows, req);
    if (rows.length === 0) throw new Error('no rows left after filtering');
    const cells = distinct(rows, 'cell');
    const estimators = distinct(rows, 'estimator');
    const { cols, rows: nRows } = panelGrid(cells.length);
    const body: string[] = [];
    cells.forEach((cell, i) => {
        const cellRows = rows.filter((r) => r.cell === cell);
        let lo = Infinity;
        let hi = -Infinity;
        for (const r of cellRows) {
            lo = Math.min(lo, num(r, 'theoretical', req.input), num(r, 'empirical', req.input));
            hi = Math.max(hi, num(r, 'theoretical', req.input), num(r, 'empirical', req.input));
        }
        const pad = 0.05 * (hi - lo || 1);
        const [ox, oy] = panelOrigin(i, cols);
        const x = linearScale([lo - pad, hi + pad], [ox, ox + PANEL_W]);
        const y = linearScale([lo - pad, hi + pad], [oy + PANEL_H, oy]);
        const p: Panel = { x, y, content: [], origin: [ox, oy], width: PANEL_W, height: PANEL_H, title: cell };
        // the y = x diagonal the quantiles should approach
        body.push(
            `<line x1="${fmt(x(lo))}" y1="${fmt(y(lo))}" x2="${fmt(x(hi))}" y2="${fmt(y(hi))}" stroke="#999" stroke-dasharray="4 3"/>`
        );
        for (const est of estimators) {
            const st = styleFor(est);
            for (const r of cellRows.filter((r) => r.estimator === est)) {
                body.push(marker(st.shape, x(num(r, 'theoretical', req.input)), y(num(r, 'empirical', req.input)), 2.6, st.color));
            }
        }
        body.push(axes(p, 'theoretical quantile', 'empirical quantile'));
    });
    const height = DEFAULT_MARGIN.top + nRows * (PANEL_H + GAP_Y) + 24;
    const leg = legend(estimators, DEFAULT_MARGIN.left, height - 14);
    const width = Math.max(DEFAULT_MARGIN.left + cols * (PANEL_W + GAP_X), leg.width + 10);
    body.push(leg.svg);
    return document(width, height, body.join('\n'));
}

// ---------------------------------------------------------- optimal-k curve

export function renderOptimalK(rows: Row[], req: FigureRequest): string {
    rows = filterRows(rows, req);
    if (rows.length === 0) throw new Error('no rows left after filtering');
    const estimators = distinct(rows, 'estimator');
    const folds = distinct(rows, 'fold_size')
        .map(Number)
        .sort((a, b) => a - b);
    const kMax = Math.max(...rows.map((r) => num(r, 'optimal_k', req.input)));
    const [ox, oy] = [DEFAULT_MARGIN.left, DEFAULT_MARGIN.top];
    const x = logScale(logDomain(folds), [ox, ox + 2 * PANEL_W]);
    const y = linearScale([0, kMax + 1], [oy + PANEL_H, oy]);
    const p: Panel = {
        x, y, content: [], origin: [ox, oy], width: 2 * PANEL_W, height: PANEL_H,
        title: 'MSE-optimal neighbor count by fold size',
    };
    const body: string[] = [];
    for (const est of estimators) {
        const st = styleFor(est);
        const pts = rows
            .filter((r) => r.estimator === est)
            .map((r) => [num(r, 'fold_size', req.input), num(r, 'optimal_k', req.input)] as const)
            .sort((a, b) => a[0] - b[0]);
        const path = pts.map(([f, k], i) => `${i ? 'L' : 'M'}${fmt(x(f))},${fmt(y(k))}`).join(' ');
        body.push(`<path d="${path}" fill="none" stroke="${st.color}" stroke-width="1.4"/>`);
        for (const [f, k] of pts) body.push(marker(st.shape, x(f), y(k), 4, st.color));
    }
    body.push(axes(p, 'fold size (log scale)', 'optimal k'));
    const height = DEFAULT_MARGIN.top + PANEL_H + GAP_Y + 24;
    const leg = legend(estimators, ox, height - 14);
    const width = Math.max(DEFAULT_MARGIN.left + 2 * PANEL_W + GAP_X, leg.width + 10);
    body.push(leg.svg);
    return document(width, height, body.join('\n'));
}

// ------------------------------------------------------------ coverage panels

/** Cell id without its fold-size suffix: panels collect a fold-size sweep. */
function cellGroup(cell: string): string {
    return cell.replace(/_n\d+$/, '');
}

export function renderCoverage(rows: Row[], req: FigureRequest): string {
    rows = filterRows(rows, req);
    if (rows.length === 0) throw new Error('no rows left after filtering');
    for (const r of rows.slice(0, 1)) num(r, 'coverage', req.input);
    const groups = distinct(
        rows.map((r) => ({ ...r, group: cellGroup(r.cell) })),
        'group'
    );
    const estimators = distinct(rows, 'estimator');
    const { cols, rows: nRows } = panelGrid(groups.length);
    const body: string[] = [];
    groups.forEach((group, i) => {
        const grpRows = rows.filter((r) => cellGroup(r.cell) === group);
        const folds = grpRows.map((r) => num(r, 'fold_size', req.input));
        const [ox, oy] = panelOrigin(i, cols);
        const x = logScale(logDomain(folds), [ox, ox + PANEL_W]);
        const y = linearScale([0, 1.02], [oy + PANEL_H, oy]);
        const p: Panel = { x, y, content: [], origin: [ox, oy], width: PANEL_W, height: PANEL_H, title: group };
        body.push(
            `<line x1="${fmt(x.domain[0] ? x(x.domain[0]) : ox)}" y1="${fmt(y(0.95))}" x2="${ox + PANEL_W}" y2="${fmt(y(0.95))}" stroke="#b2182b" stroke-dasharray="5 3"/>`
        );
        for (const est of estimators) {
            const st = styleFor(est);
            for (const r of grpRows.filter((r) => r.estimator === est)) {
                const fx = x(num(r, 'fold_size', req.input));
                const cov = num(r, 'coverage', req.input);
                const se = num(r, 'mc_se', req.input);
                const loY = y(Math.max(0, cov - 1.96 * se));
                const hiY = y(Math.min(1, cov + 1.96 * se));
                body.push(`<line x1="${fmt(fx)}" y1="${fmt(loY)}" x2="${fmt(fx)}" y2="${fmt(hiY)}" stroke="${st.color}" stroke-width="1"/>`);
                body.push(marker(st.shape, fx, y(cov), 3.4, st.color));
            }
        }
        body.push(axes(p, 'fold size (log scale)', 'coverage'));
    });
    const height = DEFAULT_MARGIN.top + nRows * (PANEL_H + GAP_Y) + 24;
    const leg = legend(estimators, DEFAULT_MARGIN.left, height - 14);
    const width = Math.max(DEFAULT_MARGIN.left + cols * (PANEL_W + GAP_X), leg.width + 10);
    body.push(leg.svg);
    return document(width, height, body.join('\n'));
}

// ---------------------------------------------------- bias / variance / MSE

const BVM_METRICS: Array<{ col: string; lo: string; hi: string; label: string }> = [
    { col: 'bias2', lo: 'bias2_lo', hi: 'bias2_hi', label: 'squared bias' },
    { col: 'variance', lo: 'variance_lo', hi: 'variance_hi', label: 'variance' },
    { col: 'mse', lo: 'mse_lo', hi: 'mse_hi', label: 'MSE' },
];

export function renderBvm(rows: Row[], req: FigureRequest): string {
    rows = filterRows(rows, req);
    if (rows.length === 0) throw new Error('no rows left after filtering');
    for (const m of BVM_METRICS) for (const r of rows.slice(0, 1)) num(r, m.col, req.input);
    const groups = distinct(
        rows.map((r) => ({ ...r, group: cellGroup(r.cell) })),
        'group'
    );
    const estimators = distinct(rows, 'estimator');
    const body: string[] = [];
    let panelIndex = 0;
    for (const group of groups) {
        const grpRows = rows.filter((r) => cellGroup(r.cell) === group);
        for (const metric of BVM_METRICS) {
            const folds = grpRows.map((r) => num(r, 'fold_size', req.input));
            const vals = grpRows
                .flatMap((r) => [num(r, metric.col, req.input), num(r, metric.hi, req.input)])
                .filter((v) => v > 0);
            const vLo = Math.min(...vals) / 3;
            const vHi = Math.max(...vals) * 3;
            const [ox, oy] = panelOrigin(panelIndex, 3);
            panelIndex += 1;
            const x = logScale(logDomain(folds), [ox, ox + PANEL_W]);
            const y = logScale([vLo, vHi], [oy + PANEL_H, oy]);
            const p: Panel = {
                x, y, content: [], origin: [ox, oy], width: PANEL_W, height: PANEL_H,
                title: `${group}: ${metric.label}`,
            };
            for (const est of estimators) {
                const st = styleFor(est);
                for (const r of grpRows.filter((r) => r.estimator === est)) {
                    const fx = x(num(r, 'fold_size', req.input));
                    const v = num(r, metric.col, req.input);
                    const lo = num(r, metric.lo, req.input);
                    const hi = num(r, metric.hi, req.input);
                    if (hi > 0) {
                        // a zero lower bound is excluded on the log scale
                        const yLo = lo > 0 ? y(lo) : y(vLo);
                        body.push(`<line x1="${fmt(fx)}" y1="${fmt(yLo)}" x2="${fmt(fx)}" y2="${fmt(y(hi))}" stroke="${st.color}" stroke-width="1"/>`);
                    }
                    if (v > 0) body.push(marker(st.shape, fx, y(v), 3.2, st.color));
                }
            }
            body.push(axes(p, 'fold size (log)', `${metric.label} (log)`));
        }
    }
    const cols = 3;
    const nRows = Math.ceil(panelIndex / cols);
    const height = DEFAULT_MARGIN.top + nRows * (PANEL_H + GAP_Y) + 24;
    const leg = legend(estimators, DEFAULT_MARGIN.left, height - 14);
    const width = Math.max(DEFAULT_MARGIN.left + cols * (PANEL_W + GAP_X), leg.width + 10);
    body.push(leg.svg);
    return document(width, height, body.join('\n'));
}

// ------------------------------------------------------ example functions

export function renderHolderExamples(rows: Row[], req: FigureRequest): string {
    if (rows.length === 0) throw new Error('no rows in input');
    for (const r of rows.slice(0, 1)) {
        num(r, 'x', req.input);
        num(r, 'g', req.input);
    }
    const combos = distinct(
        rows.map((r) => ({ ...r, combo: `s=${r.s}, n=${r.n_ref}` })),
        'combo'
    );
    const { cols, rows: nRows } = panelGrid(combos.length);
    const body: string[] = [];
    combos.forEach((combo, i) => {
        const sel = rows.filter((r) => `s=${r.s}, n=${r.n_ref}` === combo);
        const gs = sel.map((r) => num(r, 'g', req.input));
        const gLo = Math.min(...gs, 0);
        const gHi = Math.max(...gs, 1e-12);
        const pad = 0.08 * (gHi - gLo || 1);
        const [ox, oy] = panelOrigin(i, cols);
        const x = linearScale([0, 1], [ox, ox + PANEL_W]);
        const y = linearScale([gLo - pad, gHi + pad], [oy + PANEL_H, oy]);
        const p: Panel = { x, y, content: [], origin: [ox, oy], width: PANEL_W, height: PANEL_H, title: combo };
        const pts = sel
            .map((r) => [num(r, 'x', req.input), num(r, 'g', req.input)] as const)
            .sort((a, b) => a[0] - b[0]);
        const path = pts.map(([px, pg], j) => `${j ? 'L' : 'M'}${fmt(x(px))},${fmt(y(pg))}`).join(' ');
        body.push(`<path d="${path}" fill="none" stroke="#111" stroke-width="1"/>`);
        body.push(axes(p, 'x', 'g(x)'));
    });
    const width = DEFAULT_MARGIN.left + cols * (PANEL_W + GAP_X);
    const height = DEFAULT_MARGIN.top + nRows * (PANEL_H + GAP_Y) + 10;
    return document(width, height, body.join('\n'));
}

// -------------------------------------------------------------- dispatcher

const SCHEMAS: Record<FigureKind, string[]> = {
    qq: ['cell', 'estimator', 'theoretical', 'empirical'],
    'optimal-k': ['fold_size', 'estimator', 'optimal_k'],
    coverage: ['cell', 'estimator', 'fold_size', 'coverage', 'mc_se'],
    bvm: ['cell', 'estimator', 'fold_size', 'bias2', 'variance', 'mse',
        'bias2_lo', 'bias2_hi', 'variance_lo', 'variance_hi', 'mse_lo', 'mse_hi'],
    'holder-examples': ['s', 'n_ref', 'x', 'g'],
};

export function render(req: FigureRequest): string {
    const rows = readCsv(req.input, SCHEMAS[req.kind]);
    switch (req.kind) {
        case 'qq':
            return renderQq(rows, req);
        case 'optimal-k':
            return renderOptimalK(rows, req);
        case 'coverage':
            return renderCoverage(rows, req);
        case 'bvm':
            return renderBvm(rows, req);
        case 'holder-examples':
            return renderHolderExamples(rows, req);
    }
}
