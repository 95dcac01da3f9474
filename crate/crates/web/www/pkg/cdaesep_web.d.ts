/* tslint:disable */
/* eslint-disable */

/**
 * A synthetic two-source mixture with its spectrograms.
 */
export class MixtureDemo {
    free(): void;
    [Symbol.dispose](): void;
    bins(): number;
    frames(): number;
    /**
     * Ideal mask of one source, values in [0, 1], frame-major.
     */
    idealMask(index: number): Float32Array;
    /**
     * JSON array of per-source SDR, SIR, SAR and normalized SDR after
     * ideal-mask separation.
     */
    idealScores(): string;
    /**
     * Mixture magnitude in dB relative to its peak, frame-major.
     */
    mixtureDb(): Float32Array;
    constructor(seed: number, seconds: number);
    sampleRate(): number;
    sourceNames(): string[];
    stemDb(index: number): Float32Array;
}

/**
 * JSON layer table and parameter counts for seven CDAE channel widths.
 */
export function cdaeSummary(channels: Uint32Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_mixturedemo_free: (a: number, b: number) => void;
    readonly cdaeSummary: (a: number, b: number) => [number, number, number, number];
    readonly mixturedemo_bins: (a: number) => number;
    readonly mixturedemo_frames: (a: number) => number;
    readonly mixturedemo_idealMask: (a: number, b: number) => [number, number, number, number];
    readonly mixturedemo_idealScores: (a: number) => [number, number, number, number];
    readonly mixturedemo_mixtureDb: (a: number) => [number, number];
    readonly mixturedemo_new: (a: number, b: number) => [number, number, number];
    readonly mixturedemo_sampleRate: (a: number) => number;
    readonly mixturedemo_sourceNames: (a: number) => [number, number];
    readonly mixturedemo_stemDb: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
