import { Box } from './types.js';

/**
 * Mapping between image pixel space and the letterboxed viewport.
 * scale is uniform; ox/oy center the image inside the viewport.
 */
export interface ViewTransform {
  scale: number;
  ox: number;
  oy: number;
}

export function fitTransform(
  imageW: number,
  imageH: number,
  viewW: number,
  viewH: number,
): ViewTransform {
  const scale = Math.min(viewW / imageW, viewH / imageH);
  return {
    scale,
    ox: (viewW - imageW * scale) / 2,
    oy: (viewH - imageH * scale) / 2,
  };
}

export function imageToViewport(box: Box, t: ViewTransform): Box {
  return [
    box[0] * t.scale + t.ox,
    box[1] * t.scale + t.oy,
    box[2] * t.scale + t.ox,
    box[3] * t.scale + t.oy,
  ];
}

export function viewportToImage(box: Box, t: ViewTransform): Box {
  return [
    (box[0] - t.ox) / t.scale,
    (box[1] - t.oy) / t.scale,
    (box[2] - t.ox) / t.scale,
    (box[3] - t.oy) / t.scale,
  ];
}

export type Corner = 'nw' | 'ne' | 'sw' | 'se';

const MIN_EXTENT = 1.0; // image pixels; boxes must keep positive area

/** Move one corner of a box by (dx, dy) in image pixels, keeping x1<x2, y1<y2. */
export function dragCorner(box: Box, corner: Corner, dx: number, dy: number): Box {
  let [x1, y1, x2, y2] = box;
  if (corner === 'nw' || corner === 'sw') {
    x1 = Math.min(x1 + dx, x2 - MIN_EXTENT);
  } else {
    x2 = Math.max(x2 + dx, x1 + MIN_EXTENT);
  }
  if (corner === 'nw' || corner === 'ne') {
    y1 = Math.min(y1 + dy, y2 - MIN_EXTENT);
  } else {
    y2 = Math.max(y2 + dy, y1 + MIN_EXTENT);
  }
  return [x1, y1, x2, y2];
}

/** Clamp a box to the image bounds, preserving validity. */
export function clampToImage(box: Box, width: number, height: number): Box {
  const x1 = Math.max(0, Math.min(box[0], width - MIN_EXTENT));
  const y1 = Math.max(0, Math.min(box[1], height - MIN_EXTENT));
  const x2 = Math.min(width, Math.max(box[2], x1 + MIN_EXTENT));
  const y2 = Math.min(height, Math.max(box[3], y1 + MIN_EXTENT));
  return [x1, y1, x2, y2];
}

export function hitCorner(box: Box, x: number, y: number, radius: number): Corner | null {
  const corners: [Corner, number, number][] = [
    ['nw', box[0], box[1]],
    ['ne', box[2], box[1]],
    ['sw', box[0], box[3]],
    ['se', box[2], box[3]],
  ];
  for (const [name, cx, cy] of corners) {
    if (Math.hypot(x - cx, y - cy) <= radius) {
      return name;
    }
  }
  return null;
}
