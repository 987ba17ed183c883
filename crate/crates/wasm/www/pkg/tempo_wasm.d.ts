/* tslint:disable */
/* eslint-disable */

/**
 * JavaScript handle over a [`Session`].
 */
export class Workbench {
    free(): void;
    [Symbol.dispose](): void;
    activeCount(): number;
    axes(): string[];
    brush(axis: string, lo: number, hi: number): void;
    clearBrush(axis: string): void;
    clearSelection(): void;
    /**
     * Loads a scan file (`json`, `long-csv` or `wide-csv`).
     */
    static fromText(text: string, format: string, k: number): Workbench;
    k(): number;
    moveAxis(axis: string, offset: number): void;
    /**
     * Simulates the 141-run demo grid with `seed` and clusters with `k`.
     */
    constructor(seed: bigint, k: number);
    parameterRange(axis: string): Float64Array;
    parameters(): string[];
    pickCluster(axis: string, cluster: number, exclusive: boolean): void;
    recluster(k: number): void;
    runCount(): number;
    selectionJson(): string;
    svg(): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_workbench_free: (a: number, b: number) => void;
    readonly workbench_activeCount: (a: number) => [number, number, number];
    readonly workbench_axes: (a: number) => [number, number];
    readonly workbench_brush: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly workbench_clearBrush: (a: number, b: number, c: number) => void;
    readonly workbench_clearSelection: (a: number) => void;
    readonly workbench_fromText: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly workbench_k: (a: number) => number;
    readonly workbench_moveAxis: (a: number, b: number, c: number, d: number) => [number, number];
    readonly workbench_new: (a: bigint, b: number) => [number, number, number];
    readonly workbench_parameterRange: (a: number, b: number, c: number) => [number, number, number, number];
    readonly workbench_parameters: (a: number) => [number, number];
    readonly workbench_pickCluster: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly workbench_recluster: (a: number, b: number) => [number, number];
    readonly workbench_runCount: (a: number) => number;
    readonly workbench_selectionJson: (a: number) => [number, number];
    readonly workbench_svg: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
