/** Payload shapes of the node catalogue API (api/v1). */

export type ContentKind = "standardised" | "language" | "knowledge" | "graph";

export const CONTENT_KINDS: ContentKind[] = ["standardised", "language", "knowledge", "graph"];

export interface DatasetRef {
  node_id: string;
  local_id: string;
  version: number;
  kind: string;
}

export interface NodeDescriptor {
  node_id: string;
  name: string;
  domain_description: Record<string, string>;
  base_url: string;
  publisher: string;
}

export interface NodeInfo {
  node: NodeDescriptor;
  counts: Record<string, number>;
}

export interface ListItem {
  ref: DatasetRef;
  title: Record<string, string>;
  kind: ContentKind;
  categories: string[];
  catalogue_url: string;
}

export interface ListPage {
  items: ListItem[];
  page: number;
  page_size: number;
  total: number;
}

export interface MetadataDocument {
  format: string;
  ref: DatasetRef;
  title: Record<string, string>;
  description: Record<string, string>;
  categories: string[];
  license: string;
  issued_at: string;
  publisher: string;
  download_policy: "automatic" | "request";
  links: {
    composed_of: DatasetRef[];
    uses_language: DatasetRef[];
    derived_from: DatasetRef[];
  };
  content_hash: string;
}

export interface LinkEntry {
  ref: DatasetRef;
  catalogue_url: string | null;
}

export interface DetailPayload {
  record: MetadataDocument;
  links: {
    composed_of: LinkEntry[];
    uses_language: LinkEntry[];
    derived_from: LinkEntry[];
  };
  download_url: string;
}

export interface AccessRequestView {
  request_id: string;
  ref: DatasetRef;
  contact: string;
  justification: string;
  status: "pending" | "approved" | "denied";
  created_at: string;
}

export interface ApiError {
  error: { code: string; message: string };
}

export function refPath(ref: DatasetRef): string {
  return `${ref.node_id}/${ref.local_id}/${ref.version}`;
}

export function refLabel(ref: DatasetRef): string {
  return `${ref.node_id}/${ref.local_id}/v${ref.version}`;
}
