/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_workbench_free: (a: number, b: number) => void;
export const workbench_activeCount: (a: number) => [number, number, number];
export const workbench_axes: (a: number) => [number, number];
export const workbench_brush: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const workbench_clearBrush: (a: number, b: number, c: number) => void;
export const workbench_clearSelection: (a: number) => void;
export const workbench_fromText: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const workbench_k: (a: number) => number;
export const workbench_moveAxis: (a: number, b: number, c: number, d: number) => [number, number];
export const workbench_new: (a: bigint, b: number) => [number, number, number];
export const workbench_parameterRange: (a: number, b: number, c: number) => [number, number, number, number];
export const workbench_parameters: (a: number) => [number, number];
export const workbench_pickCluster: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const workbench_recluster: (a: number, b: number) => [number, number];
export const workbench_runCount: (a: number) => number;
export const workbench_selectionJson: (a: number) => [number, number];
export const workbench_svg: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
