package demo.app;

import java.io.BufferedReader;
import java.io.IOException;
import java.io.InputStreamReader;

public class Mains {

    public static void main(String[] args) {
        System.setProperty(
            Constants.DUBBO_PROPERTIES_KEY, 
            "conf/dubbo.properties");
        Main.main(args);
    }

    public static void main(String[] args) throws Exception {
        Server server = new Server(8080);
        server.setHandler(new Handler());
        server.start();
        server.join();
    }

    public static void main(String[] args) {
        if (args.length < 1) {
            System.err.println("usage: tool <file>");
            return;
        }
        for (String arg : args) {
            process(arg);
        }
    }

    public static void main(final String[] args) {
        int count = Integer.parseInt(args[0]);
        long start = System.currentTimeMillis();
        for (int i = 0; i < count; i++) {
            run(i);
        }
        System.out.println(System.currentTimeMillis() - start);
    }

    public static void main(String[] args) throws IOException {
        BufferedReader reader = new BufferedReader(new InputStreamReader(System.in));
        String line;
        while ((line = reader.readLine()) != null) {
            System.out.println(line.trim());
        }
        reader.close();
    }
}
