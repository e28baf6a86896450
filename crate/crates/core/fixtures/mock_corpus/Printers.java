package demo.model;

public class Printers {

    @Override
    public String toString() {
        StringBuilder sb = new StringBuilder();
        sb.append("Point(");
        sb.append(x).append(", ").append(y);
        sb.append(")");
        return sb.toString();
    }

    public String toString() {
        StringBuffer sb = new StringBuffer("[");
        for (int i = 0; i < size; i++) {
            if (i > 0) sb.append(", ");
            sb.append(items[i]);
        }
        sb.append("]");
        return sb.toString();
    }

    public String toString() {
        final StringBuilder sb = new StringBuilder("User{");
        sb.append("name='").append(name).append('\'');
        sb.append(", age=").append(age);
        sb.append('}');
        return sb.toString();
    }

    public String toString() {
        StringBuilder sb = new StringBuilder();
        for (String part : parts) {
            sb.append(part).append('/');
        }
        return sb.toString();
    }

    @Override
    public String toString() {
        String sb = name + "@" + Integer.toHexString(hashCode());
        return sb;
    }
}
