#!/usr/bin/env node
/**
 * figures <kind> --in <csv> --out <svg> [--cell CELL] [--estimator EST]
 * figures make-all --dir <study-output-dir> [--out-dir <dir>]
 *
 * Kinds: qq, optimal-k, coverage, bvm, holder-examples.
 * make-all renders every kind whose schema file exists in the directory.
 */

import * as fs from 'fs';
import * as path from 'path';
import { SchemaError } from './csv.js';
import { FigureKind, FigureRequest, render } from './figures.js';

const KINDS: FigureKind[] = ['qq', 'optimal-k', 'coverage', 'bvm', 'holder-examples'];

const KIND_INPUTS: Record<FigureKind, string> = {
    qq: 'qq.csv',
    'optimal-k': 'optimal_k.csv',
    coverage: 'coverage.csv',
    bvm: 'bvm.csv',
    'holder-examples': 'curves.csv',
};

function parseFlags(argv: string[]): Map<string, string> {
    const flags = new Map<string, string>();
    for (let i = 0; i < argv.length; i += 2) {
        const key = argv[i];
        if (!key.startsWith('--') || i + 1 >= argv.length) {
            throw new SchemaError(`malformed flag pair near "${key}"`);
        }
        flags.set(key.slice(2), argv[i + 1]);
    }
    return flags;
}

function renderOne(req: FigureRequest): void {
    const svg = render(req);
    fs.mkdirSync(path.dirname(path.resolve(req.output)), { recursive: true });
    fs.writeFileSync(req.output, svg);
    console.log(`wrote ${req.output}`);
}

export function main(argv: string[]): number {
    const [kind, ...rest] = argv;
    if (!kind || kind === '--help' || kind === '-h') {
        console.log(`usage: figures <${KINDS.join('|')}> --in <csv> --out <svg> [--cell CELL] [--estimator EST]`);
        console.log('       figures make-all --dir <study-dir> [--out-dir <dir>]');
        return kind ? 0 : 1;
    }
    try {
        if (kind === 'make-all') {
            const flags = parseFlags(rest);
            const dir = flags.get('dir');
            if (!dir) throw new SchemaError('make-all requires --dir');
            const outDir = flags.get('out-dir') ?? dir;
            let rendered = 0;
            for (const k of KINDS) {
                const input = path.join(dir, KIND_INPUTS[k]);
                if (fs.existsSync(input)) {
                    renderOne({ kind: k, input, output: path.join(outDir, `${k}.svg`) });
                    rendered += 1;
                }
            }
            if (rendered === 0) throw new SchemaError(`no renderable CSVs found in ${dir}`);
            return 0;
        }
        if (!KINDS.includes(kind as FigureKind)) {
            throw new SchemaError(`unknown figure kind "${kind}" (expected one of ${KINDS.join(', ')})`);
        }
        const flags = parseFlags(rest);
        const input = flags.get('in');
        const output = flags.get('out');
        if (!input || !output) throw new SchemaError(`${kind} requires --in and --out`);
        renderOne({
            kind: kind as FigureKind,
            input,
            output,
            cell: flags.get('cell'),
            estimator: flags.get('estimator'),
        });
        return 0;
    } catch (err) {
        console.error(`error: ${(err as Error).message}`);
        return 1;
    }
}

const isDirectRun =
    process.argv[1] !== undefined &&
    import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (isDirectRun) {
    process.exit(main(process.argv.slice(2)));
}
