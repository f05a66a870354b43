/**
 * CSV loading for the study's result schemas.
 *
 * Each figure kind declares the columns it needs; a missing column fails
 * fast with the column name in the message so a schema drift is obvious.
 */

import * as fs from 'fs';
import Papa from 'papaparse';

export class SchemaError extends Error {}

export type Row = Record<string, string>;

export function readCsv(path: string, requiredColumns: string[]): Row[] {
    if (!fs.existsSync(path)) {
        throw new SchemaError(`input file not found: ${path}`);
    }
    const text = fs.readFileSync(path, 'utf-8');
    const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
    if (parsed.errors.length > 0) {
        const e = parsed.errors[0];
        throw new SchemaError(`${path}: parse error at row ${e.row}: ${e.message}`);
    }
    const fields = parsed.meta.fields ?? [];
    for (const col of requiredColumns) {
        if (!fields.includes(col)) {
            throw new SchemaError(`${path}: missing required column "${col}" (found: ${fields.join(', ')})`);
        }
    }
    return parsed.data;
}

export function num(row: Row, col: string, path = 'input'): number {
    const v = Number(row[col]);
    if (!Number.isFinite(v)) {
        throw new SchemaError(`${path}: column "${col}" has non-numeric value "${row[col]}"`);
    }
    return v;
}

/** Distinct values of a column, in first-appearance order. */
export function distinct(rows: Row[], col: string): string[] {
    const seen = new Set<string>();
    const out: string[] = [];
    for (const r of rows) {
        const v = r[col];
        if (!seen.has(v)) {
            seen.add(v);
            out.push(v);
        }
    }
    return out;
}
