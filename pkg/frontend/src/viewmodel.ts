import { Box, Decision, EditedAnnotation, ReviewItem, Status, Verdict } from './types.js';
import { ViewTransform, imageToViewport } from './geometry.js';

export const HUMAN_COLOR = '#2e86de';
export const OBJECT_COLOR = '#e74c3c';

export interface OverlayBox {
  annotationId: string;
  role: 'human' | 'object';
  rect: Box; // viewport coordinates
  color: string;
  selected: boolean;
}

export interface OverlayCaption {
  annotationId: string;
  text: string;
  x: number;
  y: number;
  selected: boolean;
  status: Status;
}

export interface OverlayModel {
  boxes: OverlayBox[];
  captions: OverlayCaption[];
  banner: string | null;
}

/** Pure projection of one item onto the viewport; rendering just paints this. */
export function overlayFor(
  item: ReviewItem,
  transform: ViewTransform,
  selectedAnnotationId: string | null,
): OverlayModel {
  if (item.annotations.length === 0) {
    return { boxes: [], captions: [], banner: 'no annotations' };
  }
  const boxes: OverlayBox[] = [];
  const captions: OverlayCaption[] = [];
  for (const ann of item.annotations) {
    const selected = ann.annotation_id === selectedAnnotationId;
    const human = imageToViewport(ann.human_box, transform);
    const object = imageToViewport(ann.object_box, transform);
    boxes.push({ annotationId: ann.annotation_id, role: 'human', rect: human, color: HUMAN_COLOR, selected });
    boxes.push({ annotationId: ann.annotation_id, role: 'object', rect: object, color: OBJECT_COLOR, selected });
    const text = ann.verb && ann.object ? `${ann.verb} ${ann.object}` : `category ${ann.hoi_id}`;
    captions.push({
      annotationId: ann.annotation_id,
      text,
      x: object[0],
      y: Math.max(0, object[1] - 4),
      selected,
      status: ann.status,
    });
  }
  return { boxes, captions, banner: null };
}

export interface DecisionEvent {
  verdict: Verdict;
  optimisticStatus: Status;
}

const DECISION_STATUS: Record<Decision, Status> = {
  accept: 'accepted',
  reject: 'rejected',
  edit: 'edited',
};

/**
 * Review session state: current item, selected annotation, local status
 * mirror and verdict construction.  Network concerns live in the queue.
 */
export class ReviewViewModel {
  items: ReviewItem[] = [];
  itemIndex = 0;
  selectedAnnotation = 0;
  editing: EditedAnnotation | null = null;

  load(items: ReviewItem[]): void {
    this.items = items;
    this.itemIndex = 0;
    this.selectedAnnotation = 0;
    this.editing = null;
    this.seekPending();
  }

  currentItem(): ReviewItem | null {
    return this.items[this.itemIndex] ?? null;
  }

  currentAnnotation() {
    const item = this.currentItem();
    return item?.annotations[this.selectedAnnotation] ?? null;
  }

  selectAnnotation(index: number): void {
    const item = this.currentItem();
    if (item && index >= 0 && index < item.annotations.length) {
      this.selectedAnnotation = index;
      this.editing = null;
    }
  }

  selectByCaption(annotationId: string): void {
    const item = this.currentItem();
    if (!item) {
      return;
    }
    const index = item.annotations.findIndex((a) => a.annotation_id === annotationId);
    if (index >= 0) {
      this.selectAnnotation(index);
    }
  }

  gotoItem(index: number): void {
    if (index >= 0 && index < this.items.length) {
      this.itemIndex = index;
      this.selectedAnnotation = 0;
      this.editing = null;
    }
  }

  /** Local counters over the loaded batch (matches /api/progress after drain). */
  progress(): Record<Status, number> & { total: number } {
    const counts = { pending: 0, accepted: 0, rejected: 0, edited: 0, total: 0 };
    for (const item of this.items) {
      for (const ann of item.annotations) {
        counts[ann.status] += 1;
        counts.total += 1;
      }
    }
    return counts;
  }

  beginEdit(): EditedAnnotation | null {
    const ann = this.currentAnnotation();
    if (!ann) {
      return null;
    }
    this.editing = {
      human_box: [...ann.human_box] as Box,
      object_box: [...ann.object_box] as Box,
      hoi_id: ann.hoi_id,
    };
    return this.editing;
  }

  updateEdit(patch: Partial<EditedAnnotation>): EditedAnnotation | null {
    if (!this.editing) {
      return null;
    }
    this.editing = { ...this.editing, ...patch };
    return this.editing;
  }

  /**
   * Commit a decision for the selected annotation: returns the verdict to
   * enqueue and applies the optimistic status locally, then advances to the
   * next pending annotation.  Editing requires beginEdit()/updateEdit() first.
   */
  decide(decision: Decision, now: () => number = Date.now): DecisionEvent | null {
    const ann = this.currentAnnotation();
    if (!ann) {
      return null;
    }
    if (decision === 'edit' && !this.editing) {
      return null;
    }
    const verdict: Verdict = {
      annotation_id: ann.annotation_id,
      decision,
      timestamp: now(),
    };
    if (decision === 'edit' && this.editing) {
      verdict.edited_annotation = this.editing;
    }
    ann.status = DECISION_STATUS[decision];
    this.editing = null;
    this.advance();
    return { verdict, optimisticStatus: ann.status };
  }

  /** Move selection to the next pending annotation, crossing item boundaries. */
  advance(): void {
    const total = this.items.length;
    if (total === 0) {
      return;
    }
    const start = this.itemIndex;
    for (let step = 0; step < total; step += 1) {
      const idx = (start + step) % total;
      const item = this.items[idx];
      const from = step === 0 ? this.selectedAnnotation + 1 : 0;
      for (let a = from; a < item.annotations.length; a += 1) {
        if (item.annotations[a].status === 'pending') {
          this.itemIndex = idx;
          this.selectedAnnotation = a;
          return;
        }
      }
    }
    this.seekPending();
  }

  /** Select the first pending annotation anywhere, if one exists. */
  private seekPending(): void {
    for (let i = 0; i < this.items.length; i += 1) {
      const a = this.items[i].annotations.findIndex((x) => x.status === 'pending');
      if (a >= 0) {
        this.itemIndex = i;
        this.selectedAnnotation = a;
        return;
      }
    }
  }
}
