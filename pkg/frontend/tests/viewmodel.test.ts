import { describe, expect, it } from 'vitest';

import { fitTransform } from '../src/geometry.js';
import { Annotation, ReviewItem } from '../src/types.js';
import { HUMAN_COLOR, OBJECT_COLOR, overlayFor, ReviewViewModel } from '../src/viewmodel.js';

let nextId = 0;

function annotation(overrides: Partial<Annotation> = {}): Annotation {
  nextId += 1;
  return {
    annotation_id: `img#${nextId}`,
    human_box: [10, 10, 50, 50],
    object_box: [100, 100, 180, 160],
    hoi_id: 0,
    source: 'auto',
    status: 'pending',
    verb: 'ride',
    object: 'bicycle',
    ...overrides,
  };
}

function item(annotations: Annotation[], imageId = `img${nextId}`): ReviewItem {
  return {
    image_id: imageId,
    file: `images/${imageId}.png`,
    width: 640,
    height: 480,
    prompt_triplets: [0],
    status: 'pending',
    annotations,
  };
}

const transform = fitTransform(640, 480, 960, 720);

describe('overlayFor', () => {
  it('renders two boxes and one caption per annotation', () => {
    const model = overlayFor(item([annotation()]), transform, null);
    expect(model.boxes).toHaveLength(2);
    expect(model.captions).toHaveLength(1);
    expect(model.banner).toBeNull();
    expect(model.captions[0].text).toBe('ride bicycle');
  });

  it('shows a banner for items without annotations', () => {
    const model = overlayFor(item([]), transform, null);
    expect(model.boxes).toHaveLength(0);
    expect(model.banner).toBe('no annotations');
  });

  it('renders six boxes for three annotations and highlights the selected pair', () => {
    const anns = [annotation(), annotation(), annotation()];
    const model = overlayFor(item(anns), transform, anns[1].annotation_id);
    expect(model.boxes).toHaveLength(6);
    const selected = model.boxes.filter((b) => b.selected);
    expect(selected).toHaveLength(2);
    expect(new Set(selected.map((b) => b.annotationId))).toEqual(new Set([anns[1].annotation_id]));
    expect(new Set(selected.map((b) => b.role))).toEqual(new Set(['human', 'object']));
  });

  it('colors are stable per role', () => {
    const model = overlayFor(item([annotation()]), transform, null);
    const byRole = Object.fromEntries(model.boxes.map((b) => [b.role, b.color]));
    expect(byRole.human).toBe(HUMAN_COLOR);
    expect(byRole.object).toBe(OBJECT_COLOR);
  });

  it('falls back to the category id when captions are not provided', () => {
    const model = overlayFor(item([annotation({ verb: undefined, object: undefined, hoi_id: 7 })]), transform, null);
    expect(model.captions[0].text).toBe('category 7');
  });
});

describe('ReviewViewModel', () => {
  it('decide builds a verdict, applies the status and advances', () => {
    const vm = new ReviewViewModel();
    const items = [item([annotation()], 'one'), item([annotation()], 'two')];
    vm.load(items);
    const event = vm.decide('accept', () => 1234);
    expect(event?.verdict).toEqual({
      annotation_id: items[0].annotations[0].annotation_id,
      decision: 'accept',
      timestamp: 1234,
    });
    expect(items[0].annotations[0].status).toBe('accepted');
    expect(vm.currentItem()?.image_id).toBe('two');
  });

  it('edit requires beginEdit and carries the edited payload', () => {
    const vm = new ReviewViewModel();
    vm.load([item([annotation()], 'only')]);
    expect(vm.decide('edit')).toBeNull(); // no edit in progress
    vm.beginEdit();
    vm.updateEdit({ human_box: [12, 14, 52, 54] });
    const event = vm.decide('edit', () => 99);
    expect(event?.verdict.edited_annotation).toEqual({
      human_box: [12, 14, 52, 54],
      object_box: [100, 100, 180, 160],
      hoi_id: 0,
    });
    expect(event?.optimisticStatus).toBe('edited');
  });

  it('advance skips reviewed annotations across items', () => {
    const vm = new ReviewViewModel();
    const a = item([annotation(), annotation({ status: 'accepted' })], 'a');
    const b = item([annotation({ status: 'rejected' }), annotation()], 'b');
    vm.load([a, b]);
    vm.decide('reject');
    expect(vm.currentItem()?.image_id).toBe('b');
    expect(vm.selectedAnnotation).toBe(1);
  });

  it('progress counts mirror decisions', () => {
    const vm = new ReviewViewModel();
    vm.load([item([annotation()], 'a'), item([annotation()], 'b'), item([annotation()], 'c')]);
    vm.decide('accept');
    vm.beginEdit();
    vm.decide('edit');
    vm.decide('reject');
    expect(vm.progress()).toEqual({ pending: 0, accepted: 1, rejected: 1, edited: 1, total: 3 });
  });

  it('selectByCaption selects the annotation pair', () => {
    const vm = new ReviewViewModel();
    const anns = [annotation(), annotation(), annotation()];
    vm.load([item(anns, 'a')]);
    vm.selectByCaption(anns[2].annotation_id);
    expect(vm.selectedAnnotation).toBe(2);
  });
});
