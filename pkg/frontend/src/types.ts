// Shapes exchanged with the review service API.

/** Pixel corner coordinates [x1, y1, x2, y2]. */
export type Box = [number, number, number, number];

export type Decision = 'accept' | 'reject' | 'edit';
export type Status = 'pending' | 'accepted' | 'rejected' | 'edited';

export interface Annotation {
  annotation_id: string;
  human_box: Box;
  object_box: Box;
  hoi_id: number;
  source: string;
  status: Status;
  verb?: string;
  object?: string;
}

export interface ReviewItem {
  image_id: string;
  file: string;
  width: number;
  height: number;
  prompt_triplets: number[];
  status: Status;
  annotations: Annotation[];
}

export interface BatchResponse {
  items: ReviewItem[];
  cursor: number | null;
  total: number;
}

export interface EditedAnnotation {
  human_box: Box;
  object_box: Box;
  hoi_id: number;
}

export interface Verdict {
  annotation_id: string;
  decision: Decision;
  edited_annotation?: EditedAnnotation;
  reviewer?: string;
  timestamp: number;
}

export interface VerdictAck {
  acknowledged: boolean;
  annotation_id: string;
  status: Status;
}

export interface Progress {
  pending: number;
  accepted: number;
  rejected: number;
  edited: number;
  total: number;
}
