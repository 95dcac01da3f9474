/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_mixturedemo_free: (a: number, b: number) => void;
export const cdaeSummary: (a: number, b: number) => [number, number, number, number];
export const mixturedemo_bins: (a: number) => number;
export const mixturedemo_frames: (a: number) => number;
export const mixturedemo_idealMask: (a: number, b: number) => [number, number, number, number];
export const mixturedemo_idealScores: (a: number) => [number, number, number, number];
export const mixturedemo_mixtureDb: (a: number) => [number, number];
export const mixturedemo_new: (a: number, b: number) => [number, number, number];
export const mixturedemo_sampleRate: (a: number) => number;
export const mixturedemo_sourceNames: (a: number) => [number, number];
export const mixturedemo_stemDb: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
