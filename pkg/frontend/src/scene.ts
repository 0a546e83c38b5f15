/**
 * Backend-neutral display list.  Figure builders emit pixel-space items;
 * the SVG and raster backends consume the same scene, so both outputs
 * stay structurally identical and deterministic.
 */

export type TextAnchor = "start" | "middle" | "end";

export type Item =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string; stroke?: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width?: number; dash?: boolean }
  | { kind: "polyline"; points: Array<[number, number]>; stroke: string; width?: number; dash?: boolean }
  | { kind: "circle"; cx: number; cy: number; r: number; fill: string }
  | { kind: "cells"; x: number; y: number; cellW: number; cellH: number; colors: string[][] }
  | { kind: "text"; x: number; y: number; text: string; size?: number; anchor?: TextAnchor; fill?: string };

export interface Scene {
  width: number;
  height: number;
  background: string;
  items: Item[];
}

export function makeScene(width: number, height: number): Scene {
  return { width, height, background: "#ffffff", items: [] };
}

/** Approximate text width in pixels (monospace-style layout metric). */
export function textWidth(text: string, size: number): number {
  return text.length * size * 0.62;
}
