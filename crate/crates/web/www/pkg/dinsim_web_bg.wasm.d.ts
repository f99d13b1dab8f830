/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const break_even_rate: (a: number, b: number, c: number, d: number, e: number) => number;
export const lien_schedule: (a: number, b: number, c: number, d: number) => [number, number];
export const sweep_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
