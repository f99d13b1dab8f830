/* tslint:disable */
/* eslint-disable */

/**
 * Break-even lien rate for the given knobs, or NaN when none exists.
 */
export function break_even_rate(moc: number, duration: number, winner: number, premium: number, funds_cost: number): number;

/**
 * Lien value at months `0..=months`. Empty on invalid input.
 */
export function lien_schedule(payment: number, rate: number, horizon_months: number, months: number): Float64Array;

/**
 * Bank curves over `0..=rho_max` as `[rho, baseline, clawback]` triples.
 * Empty when the parameters are invalid.
 */
export function sweep_curves(moc: number, duration: number, winner: number, premium: number, clawback: number, funds_cost: number, rho_max: number, step: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly break_even_rate: (a: number, b: number, c: number, d: number, e: number) => number;
    readonly lien_schedule: (a: number, b: number, c: number, d: number) => [number, number];
    readonly sweep_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
